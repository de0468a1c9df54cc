#include "cbslice/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cbslice {

double sigmoid(double x) {
  if (x >= 0.0)
    return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p, double eps) {
  if (!(eps > 0.0 && eps < 0.5))
    throw std::invalid_argument("logit: eps must be in (0, 0.5)");
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("logit: p must be in [0, 1]");
  const double q = std::clamp(p, eps, 1.0 - eps);
  return std::log(q / (1.0 - q));
}

double softplus(double x) {
  if (x > 0.0)
    return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty())
    throw std::invalid_argument("log_sum_exp: empty input");
  const double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v)
    sum += std::exp(x - m);
  return m + std::log(sum);
}

std::vector<double> softmax(std::span<const double> v) {
  if (v.empty())
    throw std::invalid_argument("softmax: empty input");
  const double m = *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - m);
    sum += out[i];
  }
  for (double& x : out)
    x /= sum;
  return out;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw std::invalid_argument("kl_divergence: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0)
      sum += p[i] * std::log(p[i] / q[i]);
  }
  return sum;
}

double entropy(std::span<const double> p) {
  double sum = 0.0;
  for (double x : p) {
    if (x > 0.0)
      sum -= x * std::log(x);
  }
  return sum;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("cosine_similarity: length mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < 1e-12 || nb < 1e-12)
    return 0.0;
  return dot / (na * nb);
}

}  // namespace cbslice

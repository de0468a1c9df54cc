#ifndef CBSLICE_NUMERICS_HPP
#define CBSLICE_NUMERICS_HPP

#include <span>
#include <vector>

namespace cbslice {

// Numerically stable logistic function.
double sigmoid(double x);

// Inverse of sigmoid with clamping: p is pulled into [eps, 1 - eps] before
// taking log(p / (1 - p)). Throws std::invalid_argument unless p is in [0, 1]
// and eps is in (0, 0.5).
double logit(double p, double eps = 1e-6);

// log(1 + e^x) without overflow.
double softplus(double x);

// log(sum exp(v)) via the max-shift trick. v must be non-empty.
double log_sum_exp(std::span<const double> v);

// Softmax of v; the result sums to 1 up to rounding. v must be non-empty.
std::vector<double> softmax(std::span<const double> v);

// KL divergence sum p_i log(p_i / q_i) in nats. Terms with p_i = 0 contribute
// zero. Lengths must match.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// Shannon entropy -sum p_i log p_i in nats, with 0 log 0 = 0.
double entropy(std::span<const double> p);

// Cosine similarity; returns 0 if either norm is below 1e-12.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace cbslice

#endif

#include "cbslice/explain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cbslice/errors.hpp"
#include "cbslice/numerics.hpp"

namespace cbslice {

namespace {

// KL divergence from log-space distributions. Terms with zero probability
// drop out, so saturated posteriors give a finite (possibly huge) score
// instead of inf - inf artifacts.
double log_space_kl(std::span<const double> lp, std::span<const double> lq) {
  double s = 0.0;
  for (std::size_t i = 0; i < lp.size(); ++i) {
    const double pi = std::exp(lp[i]);
    if (pi == 0.0)
      continue;
    s += pi * (lp[i] - lq[i]);
  }
  return s;
}

// Two-point log distribution {slice j, everything else}. The complement is
// summed in log space; with a single slice it is empty and carries no mass.
std::vector<double> marginal_log_pair(const std::vector<double>& lr, std::size_t j) {
  std::vector<double> rest;
  rest.reserve(lr.size());
  for (std::size_t k = 0; k < lr.size(); ++k)
    if (k != j)
      rest.push_back(lr[k]);
  const double complement =
      rest.empty() ? -std::numeric_limits<double>::infinity() : log_sum_exp(rest);
  return {lr[j], complement};
}

double posterior_kl(const std::vector<double>& shifted,
                    const std::vector<double>& base, std::size_t j,
                    EcsaPosterior mode) {
  if (mode == EcsaPosterior::full)
    return log_space_kl(shifted, base);
  return log_space_kl(marginal_log_pair(shifted, j), marginal_log_pair(base, j));
}

}  // namespace

double ecsa_score(const SliceModel& model, std::span<const double> h,
                  std::size_t local_i, std::size_t j, double eps,
                  EcsaPosterior mode) {
  if (h.size() != model.k_err())
    throw std::invalid_argument("ecsa_score: feature length mismatch");
  if (local_i >= h.size())
    throw std::invalid_argument("ecsa_score: concept index out of range");
  if (j >= model.t_g())
    throw std::invalid_argument("ecsa_score: slice id out of range");

  const std::vector<double> base = log_responsibilities_row(model.params, h);
  std::vector<double> probe(h.begin(), h.end());

  probe[local_i] = logit(0.0, eps);
  const std::vector<double> off = log_responsibilities_row(model.params, probe);
  probe[local_i] = logit(1.0, eps);
  const std::vector<double> on = log_responsibilities_row(model.params, probe);

  const double p = sigmoid(h[local_i]);
  return (1.0 - p) * posterior_kl(off, base, j, mode) +
         p * posterior_kl(on, base, j, mode);
}

SliceExplanation keyword_concepts(const SliceModel& model, const EvalDump& dump,
                                  const ErrorSet& errs, const SliceAssignment& assign,
                                  std::size_t j, int t_k, double eps,
                                  EcsaPosterior mode, std::size_t n_exemplars) {
  if (t_k < 1)
    throw std::invalid_argument("keyword_concepts: t_k must be at least 1");
  if (j >= assign.n_slices())
    throw std::invalid_argument("keyword_concepts: slice id out of range");

  std::vector<std::size_t> members;
  for (std::size_t n = 0; n < assign.n_errors(); ++n)
    if (assign.hard_slice[n] == static_cast<int>(j))
      members.push_back(n);
  if (members.empty())
    throw PreconditionError("keyword_concepts: slice has no members");

  const Matrix features = logit_features(dump, errs, model.c_err);
  const std::size_t k = model.k_err();

  std::vector<double> mean_score(k, 0.0);
  for (std::size_t n : members) {
    const auto h = features.row(n);
    for (std::size_t i = 0; i < k; ++i)
      mean_score[i] += ecsa_score(model, h, i, j, eps, mode);
  }
  for (double& s : mean_score)
    s /= static_cast<double>(members.size());

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return mean_score[a] > mean_score[b];
  });
  order.resize(std::min<std::size_t>(static_cast<std::size_t>(t_k), k));

  double weight_sum = 0.0;
  for (std::size_t n : members)
    weight_sum += assign.posteriors(n, j);

  SliceExplanation out;
  out.slice_id = static_cast<int>(j);
  for (std::size_t i : order) {
    KeywordConcept kw;
    kw.concept_index = model.c_err[i];
    kw.name = dump.concept_names[kw.concept_index];
    kw.mean_score = mean_score[i];
    // Dominant states over the slice, weighted by membership posterior;
    // 0.5 rounds up on both.
    double pred = 0.0, truth = 0.0;
    for (std::size_t n : members) {
      const double w = assign.posteriors(n, j);
      pred += w * (features(n, i) >= 0.0 ? 1.0 : 0.0);
      truth += w * dump.concepts_true(errs.indices[n], kw.concept_index);
    }
    kw.predicted_present = pred / weight_sum >= 0.5;
    const bool true_present = truth / weight_sum >= 0.5;
    kw.correct = kw.predicted_present == true_present;
    out.keywords.push_back(std::move(kw));
  }

  std::vector<std::size_t> by_posterior = members;
  std::stable_sort(by_posterior.begin(), by_posterior.end(),
                   [&](std::size_t a, std::size_t b) {
                     return assign.posteriors(a, j) > assign.posteriors(b, j);
                   });
  by_posterior.resize(std::min(n_exemplars, by_posterior.size()));
  for (std::size_t n : by_posterior)
    out.exemplars.push_back(errs.indices[n]);
  return out;
}

std::vector<SliceExplanation> explain_slices(const SliceModel& model,
                                             const EvalDump& dump,
                                             const ErrorSet& errs,
                                             const SliceAssignment& assign,
                                             int t_k, double eps, EcsaPosterior mode,
                                             std::size_t n_exemplars) {
  std::vector<SliceExplanation> out;
  for (std::size_t j = 0; j < assign.n_slices(); ++j) {
    const bool empty = std::none_of(assign.hard_slice.begin(), assign.hard_slice.end(),
                                    [&](int h) { return h == static_cast<int>(j); });
    if (empty)
      continue;
    out.push_back(keyword_concepts(model, dump, errs, assign, j, t_k, eps, mode,
                                   n_exemplars));
  }
  return out;
}

}  // namespace cbslice

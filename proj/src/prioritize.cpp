#include "cbslice/prioritize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cbslice/errors.hpp"
#include "cbslice/numerics.hpp"

namespace cbslice {

SliceAssignment build_assignment(const SliceModel& model, const EvalDump& dump,
                                 const ErrorSet& errs) {
  const Matrix features = logit_features(dump, errs, model.c_err);
  SliceAssignment assign;
  assign.posteriors = responsibilities(model.params, features);
  assign.hard_slice.resize(assign.posteriors.rows());
  for (std::size_t n = 0; n < assign.posteriors.rows(); ++n) {
    int best = 0;
    double best_p = -1.0;
    for (std::size_t j = 0; j < assign.posteriors.cols(); ++j) {
      if (assign.posteriors(n, j) > best_p) {
        best_p = assign.posteriors(n, j);
        best = static_cast<int>(j);
      }
    }
    assign.hard_slice[n] = best;
  }

  const Matrix hard = harden(concept_probs(dump));
  assign.predicted.resize(errs.indices.size());
  for (std::size_t n = 0; n < errs.indices.size(); ++n)
    assign.predicted[n] = predict_label(dump.predictor, hard.row(errs.indices[n]));
  return assign;
}

double effective_size(const SliceAssignment& assign, std::size_t j) {
  if (j >= assign.n_slices())
    throw std::invalid_argument("effective_size: slice id out of range");
  double n_eff = 0.0;
  for (std::size_t n = 0; n < assign.n_errors(); ++n)
    if (assign.hard_slice[n] == static_cast<int>(j))
      n_eff += assign.posteriors(n, j);
  return n_eff;
}

double misprediction_coherence(const SliceAssignment& assign, std::size_t j,
                               std::size_t n_classes) {
  if (n_classes < 2)
    throw std::invalid_argument("misprediction_coherence: need at least two classes");
  if (j >= assign.n_slices())
    throw std::invalid_argument("misprediction_coherence: slice id out of range");

  std::vector<double> hist(n_classes, 0.0);
  double n_eff = 0.0;
  for (std::size_t n = 0; n < assign.n_errors(); ++n) {
    if (assign.hard_slice[n] != static_cast<int>(j))
      continue;
    const double w = assign.posteriors(n, j);
    n_eff += w;
    hist[static_cast<std::size_t>(assign.predicted[n])] += w;
  }
  if (n_eff <= 0.0)
    throw PreconditionError("misprediction_coherence: slice has no members");
  for (double& h : hist)
    h /= n_eff;
  return 1.0 - entropy(hist) / std::log(static_cast<double>(n_classes));
}

double semantic_compactness(const SliceAssignment& assign, const Matrix& features,
                            std::size_t j) {
  if (j >= assign.n_slices())
    throw std::invalid_argument("semantic_compactness: slice id out of range");
  if (features.rows() != assign.n_errors())
    throw std::invalid_argument("semantic_compactness: feature row count mismatch");

  std::vector<double> centroid(features.cols(), 0.0);
  double n_eff = 0.0;
  for (std::size_t n = 0; n < assign.n_errors(); ++n) {
    if (assign.hard_slice[n] != static_cast<int>(j))
      continue;
    const double w = assign.posteriors(n, j);
    n_eff += w;
    const auto row = features.row(n);
    for (std::size_t d = 0; d < centroid.size(); ++d)
      centroid[d] += w * row[d];
  }
  if (n_eff <= 0.0)
    throw PreconditionError("semantic_compactness: slice has no members");
  for (double& c : centroid)
    c /= n_eff;

  double sum = 0.0;
  for (std::size_t n = 0; n < assign.n_errors(); ++n) {
    if (assign.hard_slice[n] != static_cast<int>(j))
      continue;
    sum += assign.posteriors(n, j) * cosine_similarity(features.row(n), centroid);
  }
  return sum / n_eff;
}

double slice_informativeness(double mc, double sc, double n_eff, double tau) {
  if (!(tau > 0.0))
    throw std::invalid_argument("slice_informativeness: tau must be positive");
  const double rho = 1.0 - std::exp(-n_eff / tau);
  return rho * 0.5 * (mc + (1.0 + sc) / 2.0);
}

std::vector<SliceScore> rank_slices(const SliceModel& model, const EvalDump& dump,
                                    const ErrorSet& errs, double tau) {
  const SliceAssignment assign = build_assignment(model, dump, errs);
  const Matrix features = logit_features(dump, errs, model.c_err);

  std::vector<SliceScore> scored;
  std::vector<SliceScore> empty;
  for (std::size_t j = 0; j < assign.n_slices(); ++j) {
    std::size_t members = 0;
    for (int h : assign.hard_slice)
      if (h == static_cast<int>(j))
        ++members;
    if (members == 0) {
      empty.push_back({static_cast<int>(j), 0.0, 0.0, 0.0, 0.0, 0});
      continue;
    }
    SliceScore s;
    s.slice_id = static_cast<int>(j);
    s.members = members;
    s.n_eff = effective_size(assign, j);
    s.mc = misprediction_coherence(assign, j, dump.n_classes);
    s.sc = semantic_compactness(assign, features, j);
    s.si = slice_informativeness(s.mc, s.sc, s.n_eff, tau);
    scored.push_back(s);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const SliceScore& a, const SliceScore& b) { return a.si > b.si; });
  scored.insert(scored.end(), empty.begin(), empty.end());
  return scored;
}

}  // namespace cbslice

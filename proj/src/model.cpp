#include "cbslice/model.hpp"

#include <cmath>
#include <stdexcept>

#include "cbslice/errors.hpp"
#include "cbslice/numerics.hpp"

namespace cbslice {

void LinearPredictor::validate() const {
  if (weights.rows() == 0 || weights.cols() == 0)
    throw PreconditionError("predictor: empty weight matrix");
  if (bias.size() != weights.rows())
    throw PreconditionError("predictor: bias length does not match class count");
  for (double w : weights.data())
    if (!std::isfinite(w))
      throw PreconditionError("predictor: non-finite weight");
  for (double b : bias)
    if (!std::isfinite(b))
      throw PreconditionError("predictor: non-finite bias");
}

void EvalDump::validate() const {
  if (n_samples == 0)
    throw PreconditionError("dump: no samples");
  if (n_classes < 2)
    throw PreconditionError("dump: need at least two classes");
  if (concept_logits.rows() != n_samples || concept_logits.cols() != n_concepts)
    throw PreconditionError("dump: concept_logits shape mismatch");
  if (concepts_true.rows() != n_samples || concepts_true.cols() != n_concepts)
    throw PreconditionError("dump: concepts_true shape mismatch");
  if (labels_true.size() != n_samples)
    throw PreconditionError("dump: labels_true length mismatch");
  predictor.validate();
  if (predictor.n_classes() != n_classes || predictor.n_concepts() != n_concepts)
    throw PreconditionError("dump: predictor shape does not match dump");
  for (double x : concept_logits.data())
    if (!std::isfinite(x))
      throw PreconditionError("dump: non-finite concept logit");
  for (double c : concepts_true.data())
    if (c != 0.0 && c != 1.0)
      throw PreconditionError("dump: concepts_true entries must be 0 or 1");
  for (int l : labels_true)
    if (l < 0 || static_cast<std::size_t>(l) >= n_classes)
      throw PreconditionError("dump: label out of range");
  if (!slice_labels.empty()) {
    if (slice_labels.size() != n_samples)
      throw PreconditionError("dump: slice_labels length mismatch");
    for (int s : slice_labels)
      if (s < -1)
        throw PreconditionError("dump: slice label below -1");
  }
  if (concept_names.size() != n_concepts)
    throw PreconditionError("dump: concept_names length mismatch");
  if (class_names.size() != n_classes)
    throw PreconditionError("dump: class_names length mismatch");
}

Matrix concept_probs(const EvalDump& dump) {
  Matrix out(dump.concept_logits.rows(), dump.concept_logits.cols());
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] = sigmoid(dump.concept_logits.data()[i]);
  return out;
}

Matrix harden(const Matrix& probs, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("harden: threshold must be in (0, 1)");
  Matrix out(probs.rows(), probs.cols());
  for (std::size_t i = 0; i < probs.size(); ++i)
    out.data()[i] = probs.data()[i] >= threshold ? 1.0 : 0.0;
  return out;
}

std::vector<double> predict_label_dist(const LinearPredictor& predictor,
                                       std::span<const double> concepts) {
  if (concepts.size() != predictor.n_concepts())
    throw std::invalid_argument("predict_label_dist: concept length mismatch");
  std::vector<double> scores(predictor.n_classes());
  for (std::size_t l = 0; l < predictor.n_classes(); ++l) {
    double s = predictor.bias[l];
    const auto row = predictor.weights.row(l);
    for (std::size_t d = 0; d < concepts.size(); ++d)
      s += row[d] * concepts[d];
    scores[l] = s;
  }
  return softmax(scores);
}

int predict_label(const LinearPredictor& predictor, std::span<const double> concepts) {
  if (concepts.size() != predictor.n_concepts())
    throw std::invalid_argument("predict_label: concept length mismatch");
  int best = 0;
  double best_score = -INFINITY;
  for (std::size_t l = 0; l < predictor.n_classes(); ++l) {
    double s = predictor.bias[l];
    const auto row = predictor.weights.row(l);
    for (std::size_t d = 0; d < concepts.size(); ++d)
      s += row[d] * concepts[d];
    if (s > best_score) {
      best_score = s;
      best = static_cast<int>(l);
    }
  }
  return best;
}

std::vector<double> intervene(std::span<const double> concepts, std::size_t i, double v) {
  if (i >= concepts.size())
    throw std::invalid_argument("intervene: index out of range");
  std::vector<double> out(concepts.begin(), concepts.end());
  out[i] = v;
  return out;
}

std::vector<int> predicted_labels(const EvalDump& dump) {
  const Matrix hard = harden(concept_probs(dump));
  std::vector<int> out(dump.n_samples);
  for (std::size_t n = 0; n < dump.n_samples; ++n)
    out[n] = predict_label(dump.predictor, hard.row(n));
  return out;
}

ErrorSet error_set(const EvalDump& dump) {
  dump.validate();
  const std::vector<int> preds = predicted_labels(dump);
  ErrorSet errs;
  errs.per_class.resize(dump.n_classes);
  for (std::size_t n = 0; n < dump.n_samples; ++n) {
    if (preds[n] != dump.labels_true[n]) {
      errs.indices.push_back(n);
      errs.per_class[static_cast<std::size_t>(dump.labels_true[n])].push_back(n);
    }
  }
  return errs;
}

}  // namespace cbslice

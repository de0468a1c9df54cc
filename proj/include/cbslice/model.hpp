#ifndef CBSLICE_MODEL_HPP
#define CBSLICE_MODEL_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cbslice/matrix.hpp"

namespace cbslice {

// Frozen linear label head of a concept-bottleneck model: it maps a binary
// concept vector to class scores, scores = weights * c + bias.
struct LinearPredictor {
  Matrix weights;             // n_classes x n_concepts
  std::vector<double> bias;   // n_classes

  std::size_t n_classes() const { return weights.rows(); }
  std::size_t n_concepts() const { return weights.cols(); }
  void validate() const;
};

// One prediction dump: per-sample concept logits plus ground truth and the
// predictor that turns concepts into labels. slice_labels is optional ground
// truth for evaluation; -1 marks samples outside every annotated slice.
struct EvalDump {
  std::size_t n_samples = 0;
  std::size_t n_concepts = 0;
  std::size_t n_classes = 0;
  Matrix concept_logits;             // n_samples x n_concepts
  Matrix concepts_true;              // n_samples x n_concepts, entries 0 or 1
  std::vector<int> labels_true;      // n_samples, values in [0, n_classes)
  LinearPredictor predictor;
  std::vector<int> slice_labels;     // empty, or n_samples with -1 sentinel
  std::vector<std::string> concept_names;  // n_concepts
  std::vector<std::string> class_names;    // n_classes

  bool has_slice_labels() const { return !slice_labels.empty(); }
  void validate() const;
};

// Indices of mispredicted validation samples, plus the same indices grouped
// by true class. Indices are ascending within each vector.
struct ErrorSet {
  std::vector<std::size_t> indices;
  std::vector<std::vector<std::size_t>> per_class;  // n_classes entries

  std::size_t size() const { return indices.size(); }
};

// Sigmoid of every concept logit.
Matrix concept_probs(const EvalDump& dump);

// Threshold probabilities to {0, 1}; values >= threshold map to 1.
Matrix harden(const Matrix& probs, double threshold = 0.5);

// Class distribution softmax(weights * c + bias) for one concept vector.
std::vector<double> predict_label_dist(const LinearPredictor& predictor,
                                       std::span<const double> concepts);

// Argmax class; ties resolve to the lowest index.
int predict_label(const LinearPredictor& predictor, std::span<const double> concepts);

// Copy of `concepts` with position i set to v.
std::vector<double> intervene(std::span<const double> concepts, std::size_t i, double v);

// Predicted label for every sample, from hardened concept probabilities.
std::vector<int> predicted_labels(const EvalDump& dump);

// All samples whose predicted label differs from labels_true.
ErrorSet error_set(const EvalDump& dump);

}  // namespace cbslice

#endif

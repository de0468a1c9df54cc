#ifndef CBSLICE_FILTER_HPP
#define CBSLICE_FILTER_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cbslice/matrix.hpp"
#include "cbslice/model.hpp"

namespace cbslice {

// Per-class concept turbulence scores. Rows for classes with no mispredicted
// samples are all zero and flagged off in has_errors.
struct EctpTable {
  Matrix scores;                 // n_classes x n_concepts
  std::vector<bool> has_errors;  // n_classes
};

// Result of error-prone concept selection.
struct ConceptFilter {
  EctpTable table;
  int t_e = 0;
  std::vector<std::size_t> c_err;  // sorted ascending, union of per-class picks
  std::vector<std::vector<std::size_t>> per_class_top;  // empty for skipped classes
  std::vector<std::string> warnings;
};

// Turbulence of concept i for one sample: how much the label distribution
// moves when the hardened concept is forced to 0 or to 1, each branch
// weighted by the predicted probability of that branch being wrong,
//   (1 - p_i) * KL(y|c_i=0 || y) + p_i * KL(y|c_i=1 || y).
// probs is the sample's full concept probability vector.
double ectp_score(const LinearPredictor& predictor, std::span<const double> probs,
                  std::size_t i);

// Mean per-sample turbulence over each class's mispredicted samples.
EctpTable classwise_ectp(const EvalDump& dump, const ErrorSet& errs);

// Keep the top t_e concepts per class with errors, ranked by score with
// index-ascending tie breaks, and take the union. Classes whose selection
// had to include zero-score concepts produce a warning.
ConceptFilter select_error_prone(const EctpTable& table, int t_e);

// Filter that keeps every concept; used to bypass filtering.
ConceptFilter all_concepts_filter(const EvalDump& dump);

}  // namespace cbslice

#endif

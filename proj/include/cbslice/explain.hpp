#ifndef CBSLICE_EXPLAIN_HPP
#define CBSLICE_EXPLAIN_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cbslice/model.hpp"
#include "cbslice/prioritize.hpp"
#include "cbslice/slicing.hpp"

namespace cbslice {

// Which posterior the sensitivity score compares: the full slice posterior,
// or the two-point marginal of a single slice.
enum class EcsaPosterior { full, marginal };

// One keyword concept of a slice: the concept's global index, its dominant
// predicted state across the slice, and whether that matches the true state.
struct KeywordConcept {
  std::size_t concept_index;
  std::string name;
  bool predicted_present;
  bool correct;
  double mean_score;
};

struct SliceExplanation {
  int slice_id;
  std::vector<KeywordConcept> keywords;
  std::vector<std::size_t> exemplars;  // dump sample indices, best posterior first
};

// Expected shift of the slice posterior when concept local_i (an index into
// the model's selected concepts) is resampled from its predicted probability:
//   (1 - p) * KL(post | concept off || post) + p * KL(post | concept on || post)
// where the off/on posteriors come from replacing the feature with the logit
// of 0 or 1 clamped by eps. In marginal mode only slice j's two-point
// distribution enters the KL; in full mode j is ignored.
double ecsa_score(const SliceModel& model, std::span<const double> h,
                  std::size_t local_i, std::size_t j, double eps = 1e-4,
                  EcsaPosterior mode = EcsaPosterior::full);

// Top t_k keywords of slice j by mean sensitivity over its members, plus the
// highest-posterior exemplars. Throws PreconditionError when slice j has no
// members.
SliceExplanation keyword_concepts(const SliceModel& model, const EvalDump& dump,
                                  const ErrorSet& errs, const SliceAssignment& assign,
                                  std::size_t j, int t_k = 5, double eps = 1e-4,
                                  EcsaPosterior mode = EcsaPosterior::full,
                                  std::size_t n_exemplars = 5);

// Explanations for every non-empty slice, ascending slice id.
std::vector<SliceExplanation> explain_slices(const SliceModel& model,
                                             const EvalDump& dump,
                                             const ErrorSet& errs,
                                             const SliceAssignment& assign,
                                             int t_k = 5, double eps = 1e-4,
                                             EcsaPosterior mode = EcsaPosterior::full,
                                             std::size_t n_exemplars = 5);

}  // namespace cbslice

#endif

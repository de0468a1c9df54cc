#ifndef CBSLICE_PRIORITIZE_HPP
#define CBSLICE_PRIORITIZE_HPP

#include <cstddef>
#include <vector>

#include "cbslice/matrix.hpp"
#include "cbslice/model.hpp"
#include "cbslice/slicing.hpp"

namespace cbslice {

// Slice memberships of every mispredicted sample: soft posteriors, the argmax
// slice (ties to the lowest id), and the sample's predicted label. Row n
// corresponds to errs.indices[n].
struct SliceAssignment {
  Matrix posteriors;                // n_errors x t_g
  std::vector<int> hard_slice;      // n_errors
  std::vector<int> predicted;       // n_errors

  std::size_t n_slices() const { return posteriors.cols(); }
  std::size_t n_errors() const { return posteriors.rows(); }
};

SliceAssignment build_assignment(const SliceModel& model, const EvalDump& dump,
                                 const ErrorSet& errs);

// Posterior mass a slice holds over its argmax members.
double effective_size(const SliceAssignment& assign, std::size_t j);

// 1 - H(p)/log L where p is the posterior-weighted predicted-label histogram
// of slice j's members. Throws PreconditionError when the slice is empty.
double misprediction_coherence(const SliceAssignment& assign, std::size_t j,
                               std::size_t n_classes);

// Posterior-weighted mean cosine similarity between member features and the
// slice's weighted centroid. Throws PreconditionError when the slice is empty.
double semantic_compactness(const SliceAssignment& assign, const Matrix& features,
                            std::size_t j);

// rho * (mc + (1 + sc) / 2) / 2 with rho = 1 - exp(-n_eff / tau).
double slice_informativeness(double mc, double sc, double n_eff, double tau);

struct SliceScore {
  int slice_id;
  double n_eff;
  double mc;
  double sc;
  double si;
  std::size_t members;
};

// Score every slice and sort by informativeness (descending, id ascending on
// ties). Slices with no members get SI = 0 and sort after all scored slices.
std::vector<SliceScore> rank_slices(const SliceModel& model, const EvalDump& dump,
                                    const ErrorSet& errs, double tau = 5.0);

}  // namespace cbslice

#endif

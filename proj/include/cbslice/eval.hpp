#ifndef CBSLICE_EVAL_HPP
#define CBSLICE_EVAL_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "cbslice/matrix.hpp"
#include "cbslice/prioritize.hpp"

namespace cbslice {

// Agreement between discovered slices and annotated ground-truth slices.
// truth_ids[i] is an annotated slice id, matching[i] the discovered slice
// that scored best against it, per_pair_p10(i, j) the fraction of discovered
// slice j's top-10 samples that carry annotation truth_ids[i].
struct MetricReport {
  double precision_at_10;
  double mgf;
  std::vector<int> truth_ids;
  std::vector<int> matching;
  Matrix per_pair_p10;
};

// The ten error rows with the highest posterior for slice j (ties resolve to
// the lower row). Requires at least ten error samples.
std::vector<std::size_t> top10_members(const SliceAssignment& assign, std::size_t j);

// truth holds one annotation per error row; -1 means unannotated. At least
// one row must be annotated. precision_at_10 averages, over annotated ids,
// the best per_pair_p10 across discovered slices; mgf averages the fraction
// of the matched slice's members that carry the annotation.
MetricReport evaluate_discovery(const SliceAssignment& assign,
                                std::span<const int> truth);

}  // namespace cbslice

#endif

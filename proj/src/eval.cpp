#include "cbslice/eval.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include "cbslice/errors.hpp"

namespace cbslice {

std::vector<std::size_t> top10_members(const SliceAssignment& assign, std::size_t j) {
  if (j >= assign.n_slices())
    throw std::invalid_argument("top10_members: slice id out of range");
  if (assign.n_errors() < 10)
    throw PreconditionError("top10_members: need at least ten error samples");
  std::vector<std::size_t> order(assign.n_errors());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return assign.posteriors(a, j) > assign.posteriors(b, j);
  });
  order.resize(10);
  return order;
}

MetricReport evaluate_discovery(const SliceAssignment& assign,
                                std::span<const int> truth) {
  if (truth.size() != assign.n_errors())
    throw std::invalid_argument("evaluate_discovery: truth length mismatch");
  if (assign.n_errors() < 10)
    throw PreconditionError("evaluate_discovery: need at least ten error samples");

  std::set<int> ids;
  for (int t : truth)
    if (t >= 0)
      ids.insert(t);
  if (ids.empty())
    throw PreconditionError("evaluate_discovery: no annotated slices in the error set");

  MetricReport report;
  report.truth_ids.assign(ids.begin(), ids.end());
  const std::size_t t_s = report.truth_ids.size();
  const std::size_t t_g = assign.n_slices();
  report.per_pair_p10 = Matrix(t_s, t_g);

  std::vector<std::vector<std::size_t>> tops(t_g);
  for (std::size_t j = 0; j < t_g; ++j)
    tops[j] = top10_members(assign, j);

  for (std::size_t i = 0; i < t_s; ++i) {
    const int id = report.truth_ids[i];
    for (std::size_t j = 0; j < t_g; ++j) {
      int hits = 0;
      for (std::size_t n : tops[j])
        if (truth[n] == id)
          ++hits;
      report.per_pair_p10(i, j) = hits / 10.0;
    }
  }

  report.precision_at_10 = 0.0;
  report.mgf = 0.0;
  report.matching.resize(t_s);
  for (std::size_t i = 0; i < t_s; ++i) {
    std::size_t best_j = 0;
    double best = -1.0;
    for (std::size_t j = 0; j < t_g; ++j) {
      if (report.per_pair_p10(i, j) > best) {
        best = report.per_pair_p10(i, j);
        best_j = j;
      }
    }
    report.matching[i] = static_cast<int>(best_j);
    report.precision_at_10 += best;

    std::size_t members = 0, hits = 0;
    for (std::size_t n = 0; n < assign.n_errors(); ++n) {
      if (assign.hard_slice[n] != static_cast<int>(best_j))
        continue;
      ++members;
      if (truth[n] == report.truth_ids[i])
        ++hits;
    }
    if (members > 0)
      report.mgf += static_cast<double>(hits) / static_cast<double>(members);
  }
  report.precision_at_10 /= static_cast<double>(t_s);
  report.mgf /= static_cast<double>(t_s);
  return report;
}

}  // namespace cbslice

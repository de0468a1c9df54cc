#include "cbslice/filter.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include "cbslice/errors.hpp"
#include "cbslice/numerics.hpp"

namespace cbslice {

double ectp_score(const LinearPredictor& predictor, std::span<const double> probs,
                  std::size_t i) {
  if (probs.size() != predictor.n_concepts())
    throw std::invalid_argument("ectp_score: concept length mismatch");
  if (i >= probs.size())
    throw std::invalid_argument("ectp_score: concept index out of range");

  std::vector<double> hard(probs.size());
  for (std::size_t d = 0; d < probs.size(); ++d)
    hard[d] = probs[d] >= 0.5 ? 1.0 : 0.0;

  const std::vector<double> base = predict_label_dist(predictor, hard);
  const std::vector<double> off = predict_label_dist(predictor, intervene(hard, i, 0.0));
  const std::vector<double> on = predict_label_dist(predictor, intervene(hard, i, 1.0));

  const double p = probs[i];
  return (1.0 - p) * kl_divergence(off, base) + p * kl_divergence(on, base);
}

EctpTable classwise_ectp(const EvalDump& dump, const ErrorSet& errs) {
  if (errs.per_class.size() != dump.n_classes)
    throw PreconditionError("classwise_ectp: error set does not match dump");

  const Matrix probs = concept_probs(dump);
  EctpTable table;
  table.scores = Matrix(dump.n_classes, dump.n_concepts);
  table.has_errors.assign(dump.n_classes, false);

  for (std::size_t l = 0; l < dump.n_classes; ++l) {
    const auto& members = errs.per_class[l];
    if (members.empty())
      continue;
    table.has_errors[l] = true;
    for (std::size_t n : members) {
      const auto row = probs.row(n);
      for (std::size_t i = 0; i < dump.n_concepts; ++i)
        table.scores(l, i) += ectp_score(dump.predictor, row, i);
    }
    const double inv = 1.0 / static_cast<double>(members.size());
    for (std::size_t i = 0; i < dump.n_concepts; ++i)
      table.scores(l, i) *= inv;
  }
  return table;
}

ConceptFilter select_error_prone(const EctpTable& table, int t_e) {
  if (t_e < 1)
    throw std::invalid_argument("select_error_prone: t_e must be at least 1");
  if (table.has_errors.size() != table.scores.rows())
    throw std::invalid_argument("select_error_prone: flag length mismatch");

  const std::size_t k = table.scores.cols();
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(t_e), k);

  ConceptFilter filter;
  filter.table = table;
  filter.t_e = t_e;
  filter.per_class_top.resize(table.scores.rows());

  std::set<std::size_t> picked;
  for (std::size_t l = 0; l < table.scores.rows(); ++l) {
    if (!table.has_errors[l])
      continue;
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return table.scores(l, a) > table.scores(l, b);
    });
    order.resize(keep);
    bool filled_with_zero = false;
    for (std::size_t i : order) {
      if (table.scores(l, i) <= 0.0)
        filled_with_zero = true;
      picked.insert(i);
    }
    if (filled_with_zero)
      filter.warnings.push_back("class " + std::to_string(l) +
                                ": fewer than t_e concepts have positive score; "
                                "selection padded by lowest index");
    filter.per_class_top[l] = std::move(order);
  }
  if (picked.empty())
    throw PreconditionError("select_error_prone: no class has mispredicted samples");

  filter.c_err.assign(picked.begin(), picked.end());
  return filter;
}

ConceptFilter all_concepts_filter(const EvalDump& dump) {
  ConceptFilter filter;
  filter.table.scores = Matrix(dump.n_classes, dump.n_concepts);
  filter.table.has_errors.assign(dump.n_classes, false);
  filter.t_e = static_cast<int>(dump.n_concepts);
  filter.c_err.resize(dump.n_concepts);
  std::iota(filter.c_err.begin(), filter.c_err.end(), 0);
  filter.per_class_top.resize(dump.n_classes);
  return filter;
}

}  // namespace cbslice

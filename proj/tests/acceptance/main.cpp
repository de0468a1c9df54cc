// Release gate. Ten checks, one verdict line each; the process exits nonzero
// if any of them fails. Every tolerance and budget is pinned right here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cbslice/commands.hpp"
#include "cbslice/eval.hpp"
#include "cbslice/explain.hpp"
#include "cbslice/filter.hpp"
#include "cbslice/io.hpp"
#include "cbslice/matrix.hpp"
#include "cbslice/model.hpp"
#include "cbslice/prioritize.hpp"
#include "cbslice/rng.hpp"
#include "cbslice/slicing.hpp"
#include "cbslice/synth.hpp"

namespace fs = std::filesystem;
using namespace cbslice;

namespace {

constexpr double kGradRelTol = 1e-4;
constexpr double kGradFdStep = 1e-5;
constexpr double kGradDenomFloor = 1e-6;
constexpr double kGradBudgetSec = 5.0;
constexpr int kGradPoints = 20;

constexpr int kFuzzParamSets = 100;
constexpr int kFuzzSamplesPerSet = 100;
constexpr double kRowSumTol = 1e-9;
constexpr double kLogitCap = 1e3;

constexpr double kOracleTol = 1e-9;

constexpr double kRecoveryP10 = 0.9;
constexpr double kRecoveryMgf = 0.8;
constexpr double kRecoveryBudgetSec = 180.0;

constexpr int kFuzzSlices = 1000;
constexpr double kBoundExcursion = 1e-12;

constexpr double kSweepP10Slack = 0.05;
constexpr double kSweepLossSlack = 0.05;

struct Verdict {
  bool ok;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* format, ...) {
  char buf[256];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------------
// Brute-force references. Everything below recomputes library quantities with
// plain std::exp / std::log loops so the gate does not trust the code under
// test for its expected values.

std::vector<double> ref_softmax(const std::vector<double>& a) {
  double m = a[0];
  for (double v : a) m = std::max(m, v);
  std::vector<double> out(a.size());
  double z = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = std::exp(a[i] - m);
    z += out[i];
  }
  for (double& v : out) v /= z;
  return out;
}

double ref_kl(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) s += p[i] * std::log(p[i] / q[i]);
  return s;
}

std::vector<double> ref_log_components(const GmmParams& gmm,
                                       std::span<const double> x) {
  const double half_log_2pi = 0.5 * std::log(2.0 * 3.14159265358979323846);
  std::vector<double> out(gmm.components());
  for (std::size_t j = 0; j < gmm.components(); ++j) {
    double acc = 0.0;
    for (std::size_t d = 0; d < gmm.dims(); ++d) {
      const double lv = gmm.log_vars(j, d);
      const double diff = x[d] - gmm.means(j, d);
      acc += -half_log_2pi - 0.5 * lv - 0.5 * diff * diff * std::exp(-lv);
    }
    out[j] = acc;
  }
  return out;
}

std::vector<double> ref_responsibilities(const GmmParams& gmm,
                                         std::span<const double> x) {
  const std::vector<double> alpha = ref_softmax(gmm.weight_logits);
  std::vector<double> a = ref_log_components(gmm, x);
  for (std::size_t j = 0; j < a.size(); ++j) a[j] += std::log(alpha[j]);
  return ref_softmax(a);
}

double ref_gmm_nll(const GmmParams& gmm, const Matrix& features) {
  const std::vector<double> alpha = ref_softmax(gmm.weight_logits);
  double nll = 0.0;
  for (std::size_t n = 0; n < features.rows(); ++n) {
    const std::vector<double> logn = ref_log_components(gmm, features.row(n));
    double density = 0.0;
    for (std::size_t j = 0; j < logn.size(); ++j)
      density += alpha[j] * std::exp(logn[j]);
    nll -= std::log(density);
  }
  return nll;
}

double ref_ecsa(const SliceModel& model, std::vector<double> h, std::size_t i,
                std::size_t j, double eps, EcsaPosterior mode) {
  const auto posterior = [&](const std::vector<double>& v) {
    std::vector<double> full = ref_responsibilities(model.params.gmm, v);
    if (mode == EcsaPosterior::full) return full;
    double rest = 0.0;
    for (std::size_t r = 0; r < full.size(); ++r)
      if (r != j) rest += full[r];
    return std::vector<double>{full[j], rest};
  };
  const std::vector<double> base = posterior(h);
  std::vector<double> off = h, on = h;
  off[i] = std::log(eps / (1.0 - eps));
  on[i] = std::log((1.0 - eps) / eps);
  const double p = 1.0 / (1.0 + std::exp(-h[i]));
  return (1.0 - p) * ref_kl(posterior(off), base) + p * ref_kl(posterior(on), base);
}

std::vector<std::size_t> ref_members(const SliceAssignment& assign, std::size_t j) {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < assign.n_errors(); ++n)
    if (assign.hard_slice[n] == static_cast<int>(j)) out.push_back(n);
  return out;
}

double ref_mc(const SliceAssignment& assign, std::size_t j, std::size_t n_classes) {
  std::vector<double> w(n_classes, 0.0);
  double total = 0.0;
  for (std::size_t n : ref_members(assign, j)) {
    w[static_cast<std::size_t>(assign.predicted[n])] += assign.posteriors(n, j);
    total += assign.posteriors(n, j);
  }
  double entropy = 0.0;
  for (double v : w) {
    const double p = v / total;
    if (p > 0.0) entropy -= p * std::log(p);
  }
  return 1.0 - entropy / std::log(static_cast<double>(n_classes));
}

double ref_sc(const SliceAssignment& assign, const Matrix& features, std::size_t j) {
  const std::vector<std::size_t> members = ref_members(assign, j);
  const std::size_t d = features.cols();
  std::vector<double> centroid(d, 0.0);
  double total = 0.0;
  for (std::size_t n : members) {
    const double w = assign.posteriors(n, j);
    for (std::size_t k = 0; k < d; ++k) centroid[k] += w * features(n, k);
    total += w;
  }
  for (double& v : centroid) v /= total;
  const auto cos_to_centroid = [&](std::span<const double> x) {
    double dot = 0.0, nx = 0.0, nc = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      dot += x[k] * centroid[k];
      nx += x[k] * x[k];
      nc += centroid[k] * centroid[k];
    }
    if (nx == 0.0 || nc == 0.0) return 0.0;
    return dot / (std::sqrt(nx) * std::sqrt(nc));
  };
  double acc = 0.0;
  for (std::size_t n : members)
    acc += assign.posteriors(n, j) * cos_to_centroid(features.row(n));
  return acc / total;
}

double ref_n_eff(const SliceAssignment& assign, std::size_t j) {
  double total = 0.0;
  for (std::size_t n : ref_members(assign, j)) total += assign.posteriors(n, j);
  return total;
}

double ref_si(double mc, double sc, double n_eff, double tau) {
  return (1.0 - std::exp(-n_eff / tau)) * 0.5 * (mc + (1.0 + sc) / 2.0);
}

struct RefMetrics {
  double p10 = 0.0;
  double mgf = 0.0;
  std::vector<int> truth_ids;
  std::vector<int> matching;
  std::vector<std::vector<double>> per_pair;
};

RefMetrics ref_metrics(const SliceAssignment& assign, const std::vector<int>& truth) {
  RefMetrics out;
  std::set<int> ids;
  for (int t : truth)
    if (t >= 0) ids.insert(t);
  out.truth_ids.assign(ids.begin(), ids.end());

  const std::size_t t_g = assign.n_slices();
  for (int id : out.truth_ids) {
    std::vector<double> row(t_g);
    for (std::size_t j = 0; j < t_g; ++j) {
      std::vector<std::size_t> order(assign.n_errors());
      for (std::size_t n = 0; n < order.size(); ++n) order[n] = n;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return assign.posteriors(a, j) > assign.posteriors(b, j);
      });
      int hits = 0;
      for (std::size_t r = 0; r < 10; ++r)
        if (truth[order[r]] == id) ++hits;
      row[j] = hits / 10.0;
    }
    std::size_t best = 0;
    for (std::size_t j = 1; j < t_g; ++j)
      if (row[j] > row[best]) best = j;
    out.matching.push_back(static_cast<int>(best));
    out.per_pair.push_back(row);
  }

  for (std::size_t i = 0; i < out.truth_ids.size(); ++i)
    out.p10 += out.per_pair[i][static_cast<std::size_t>(out.matching[i])];
  out.p10 /= static_cast<double>(out.truth_ids.size());

  for (std::size_t i = 0; i < out.truth_ids.size(); ++i) {
    const std::vector<std::size_t> members =
        ref_members(assign, static_cast<std::size_t>(out.matching[i]));
    if (members.empty()) continue;
    double hits = 0.0;
    for (std::size_t n : members)
      if (truth[n] == out.truth_ids[i]) hits += 1.0;
    out.mgf += hits / static_cast<double>(members.size());
  }
  out.mgf /= static_cast<double>(out.truth_ids.size());
  return out;
}

// ---------------------------------------------------------------------------
// Shared pipeline plumbing.

std::vector<int> truth_rows(const EvalDump& dump, const ErrorSet& errs) {
  std::vector<int> truth;
  truth.reserve(errs.size());
  for (std::size_t idx : errs.indices) truth.push_back(dump.slice_labels[idx]);
  return truth;
}

struct PipelineRun {
  SliceModel model;
  MetricReport report;
};

PipelineRun run_pipeline(const EvalDump& dump, bool filtered, int t_e,
                         const TrainConfig& config, bool linear = false) {
  const ErrorSet errs = error_set(dump);
  const ConceptFilter filter =
      filtered ? select_error_prone(classwise_ectp(dump, errs), t_e)
               : all_concepts_filter(dump);
  PipelineRun run;
  run.model = linear ? fit_slices_linear(dump, errs, filter, config)
                     : fit_slices(dump, errs, filter, config);
  const SliceAssignment assign = build_assignment(run.model, dump, errs);
  run.report = evaluate_discovery(assign, truth_rows(dump, errs));
  return run;
}

std::string slurp_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool same_files(const fs::path& a, const fs::path& b) {
  return slurp_bytes(a) == slurp_bytes(b);
}

// ---------------------------------------------------------------------------
// Criterion 1: analytic gradients against central finite differences. The
// points are drawn at the scale training actually visits; far outside it the
// mixture saturates and a central difference returns only round-off noise.

Verdict check_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  TrainConfig config;
  config.t_g = 3;
  config.lambda = 15.0;

  double max_rel = 0.0;
  for (int point = 0; point < kGradPoints; ++point) {
    Matrix pool(12, 4);
    for (double& v : pool.data()) v = rng.normal(0.0, 1.5);
    SliceParams params = init_params(pool, 3, SliceVariant::gmm, rng, 1e-4);
    std::vector<double> flat = flatten_params(params);
    for (double& v : flat) v += rng.uniform(-0.3, 0.3);
    unflatten_params(flat, params);

    Matrix batch(5, 4);
    for (double& v : batch.data()) v = rng.normal(0.0, 2.0);
    Matrix target_true(5, 4), target_pred(5, 4);
    for (double& v : target_true.data()) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
    for (double& v : target_pred.data()) v = rng.bernoulli(0.5) ? 1.0 : 0.0;

    const std::vector<double> analytic = flatten_gradients(
        loss_gradients(params, batch, target_true, target_pred, config), params);

    for (std::size_t k = 0; k < flat.size(); ++k) {
      std::vector<double> bumped = flat;
      SliceParams probe = params;
      bumped[k] = flat[k] + kGradFdStep;
      unflatten_params(bumped, probe);
      const double hi = total_loss(probe, batch, target_true, target_pred, config);
      bumped[k] = flat[k] - kGradFdStep;
      unflatten_params(bumped, probe);
      const double lo = total_loss(probe, batch, target_true, target_pred, config);
      const double numeric = (hi - lo) / (2.0 * kGradFdStep);
      const double denom =
          std::max({std::abs(analytic[k]), std::abs(numeric), kGradDenomFloor});
      max_rel = std::max(max_rel, std::abs(analytic[k] - numeric) / denom);
    }
  }

  const double elapsed = seconds_since(t0);
  return {max_rel < kGradRelTol && elapsed < kGradBudgetSec,
          fmt("max rel err %.2e over %d points, %.2f s", max_rel, kGradPoints,
              elapsed)};
}

// ---------------------------------------------------------------------------
// Criterion 2: fuzzed posterior rows stay normalised and finite.

Verdict check_normalisation() {
  Rng rng(202);
  double worst = 0.0;
  long bad_values = 0;

  for (int set = 0; set < kFuzzParamSets; ++set) {
    const std::size_t t_g = 1 + rng.uniform_int(5);
    const std::size_t dims = 1 + rng.uniform_int(6);
    GmmParams gmm;
    gmm.means = Matrix(t_g, dims);
    gmm.log_vars = Matrix(t_g, dims);
    gmm.weight_logits.resize(t_g);
    for (double& v : gmm.means.data()) v = rng.uniform(-kLogitCap, kLogitCap);
    for (double& v : gmm.log_vars.data()) v = rng.uniform(std::log(1e-4), 600.0);
    for (double& v : gmm.weight_logits) v = rng.uniform(-300.0, 300.0);

    Matrix samples(kFuzzSamplesPerSet, dims);
    for (double& v : samples.data()) v = rng.uniform(-kLogitCap, kLogitCap);
    for (std::size_t n = 0; n < samples.rows(); n += 10)
      samples(n, n % dims) = (n % 20 == 0) ? kLogitCap : -kLogitCap;

    const Matrix resp = responsibilities(gmm, samples);
    for (std::size_t n = 0; n < resp.rows(); ++n) {
      double sum = 0.0;
      for (std::size_t j = 0; j < resp.cols(); ++j) {
        if (!std::isfinite(resp(n, j))) ++bad_values;
        sum += resp(n, j);
      }
      worst = std::max(worst, std::abs(sum - 1.0));
    }
  }

  return {bad_values == 0 && worst < kRowSumTol,
          fmt("%d pairs, worst |row sum - 1| %.2e, %ld non-finite",
              kFuzzParamSets * kFuzzSamplesPerSet, worst, bad_values)};
}

// ---------------------------------------------------------------------------
// Criterion 3: library scores against the brute-force references.

Verdict check_oracles() {
  double worst = 0.0;
  const auto note = [&](double got, double want) {
    worst = std::max(worst, std::abs(got - want));
  };

  // Mixture posteriors and likelihood on a dense three-component instance.
  GmmParams gmm;
  gmm.means = Matrix::from_rows({{0.0, 1.0}, {2.0, -1.0}, {-1.0, 3.0}});
  gmm.log_vars = Matrix::from_rows({{0.2, -0.5}, {0.0, 0.3}, {-0.1, 0.1}});
  gmm.weight_logits = {0.3, -0.2, 0.5};
  const Matrix points =
      Matrix::from_rows({{0.5, 0.5}, {2.0, -0.5}, {-1.5, 2.5}, {1.0, 1.0}});
  const Matrix resp = responsibilities(gmm, points);
  for (std::size_t n = 0; n < points.rows(); ++n) {
    const std::vector<double> want = ref_responsibilities(gmm, points.row(n));
    for (std::size_t j = 0; j < want.size(); ++j) note(resp(n, j), want[j]);
  }
  note(gmm_nll(gmm, points), ref_gmm_nll(gmm, points));

  // Concept sensitivity, full and marginal posterior modes.
  SliceModel split;
  split.params.variant = SliceVariant::gmm;
  split.params.gmm.means = Matrix::from_rows({{-3.0, 0.0}, {3.0, 0.0}, {0.0, 8.0}});
  split.params.gmm.log_vars = Matrix(3, 2, 0.0);
  split.params.gmm.weight_logits = {0.0, 0.0, -1.0};
  split.c_err = {0, 1};
  for (const std::vector<double>& h :
       {std::vector<double>{-2.5, 1.0}, {0.5, -0.5}, {3.0, 2.0}}) {
    note(ecsa_score(split, h, 0, 0, 1e-4, EcsaPosterior::full),
         ref_ecsa(split, h, 0, 0, 1e-4, EcsaPosterior::full));
    note(ecsa_score(split, h, 1, 1, 1e-4, EcsaPosterior::marginal),
         ref_ecsa(split, h, 1, 1, 1e-4, EcsaPosterior::marginal));
  }

  // Slice quality scores on a five-member assignment.
  SliceAssignment small;
  small.posteriors = Matrix::from_rows({{0.7, 0.2, 0.1},
                                        {0.1, 0.8, 0.1},
                                        {0.5, 0.3, 0.2},
                                        {0.2, 0.2, 0.6},
                                        {0.3, 0.4, 0.3}});
  small.hard_slice = {0, 1, 0, 2, 1};
  small.predicted = {0, 1, 1, 2, 0};
  const Matrix feats = Matrix::from_rows(
      {{1.0, 2.0}, {-1.0, 0.5}, {2.0, 1.0}, {0.5, -1.5}, {-0.5, -0.5}});
  for (std::size_t j = 0; j < 3; ++j) {
    const double mc = misprediction_coherence(small, j, 3);
    const double sc = semantic_compactness(small, feats, j);
    const double ne = effective_size(small, j);
    note(mc, ref_mc(small, j, 3));
    note(sc, ref_sc(small, feats, j));
    note(ne, ref_n_eff(small, j));
    note(slice_informativeness(mc, sc, ne, 5.0), ref_si(mc, sc, ne, 5.0));
  }

  // Discovery metrics on a twelve-row instance with overlapping slices.
  SliceAssignment twelve;
  twelve.posteriors = Matrix::from_rows({{0.80, 0.15, 0.05},
                                         {0.75, 0.20, 0.05},
                                         {0.70, 0.10, 0.20},
                                         {0.10, 0.85, 0.05},
                                         {0.15, 0.80, 0.05},
                                         {0.55, 0.40, 0.05},
                                         {0.60, 0.30, 0.10},
                                         {0.20, 0.70, 0.10},
                                         {0.25, 0.70, 0.05},
                                         {0.65, 0.25, 0.10},
                                         {0.30, 0.30, 0.40},
                                         {0.05, 0.60, 0.35}});
  twelve.hard_slice = {0, 0, 0, 1, 1, 0, 0, 1, 1, 0, 2, 1};
  twelve.predicted.assign(12, 0);
  const std::vector<int> truth = {0, 0, 0, 1, 1, -1, 0, 1, 1, 0, -1, 1};
  const MetricReport got = evaluate_discovery(twelve, truth);
  const RefMetrics want = ref_metrics(twelve, truth);
  note(got.precision_at_10, want.p10);
  note(got.mgf, want.mgf);
  bool matching_ok = got.truth_ids == want.truth_ids && got.matching == want.matching;
  for (std::size_t i = 0; i < want.per_pair.size() && matching_ok; ++i)
    for (std::size_t j = 0; j < want.per_pair[i].size(); ++j)
      note(got.per_pair_p10(i, j), want.per_pair[i][j]);

  return {matching_ok && worst < kOracleTol,
          fmt("worst |library - reference| %.2e%s", worst,
              matching_ok ? "" : ", matching disagrees")};
}

// ---------------------------------------------------------------------------
// Criterion 4: both planted failure modes recovered from the digit-sum dump.

Verdict check_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  double mean_p10 = 0.0, mean_mgf = 0.0;
  const int seeds = 5;
  for (int seed = 1; seed <= seeds; ++seed) {
    const EvalDump dump = generate(mnist_sum_config(seed));
    TrainConfig config;
    config.t_g = 10;
    config.lambda = 15.0;
    config.seed = seed;
    const PipelineRun run = run_pipeline(dump, true, 10, config);
    mean_p10 += run.report.precision_at_10;
    mean_mgf += run.report.mgf;
  }
  mean_p10 /= seeds;
  mean_mgf /= seeds;
  const double elapsed = seconds_since(t0);
  return {mean_p10 >= kRecoveryP10 && mean_mgf >= kRecoveryMgf &&
              elapsed < kRecoveryBudgetSec,
          fmt("mean P@10 %.3f, mean MGF %.3f over %d seeds, %.1f s", mean_p10,
              mean_mgf, seeds, elapsed)};
}

// ---------------------------------------------------------------------------
// Criterion 5: turbulence scores zero out ignored concepts and surface the
// planted decisive concept.

// Digit-sum dump whose planted failure is a spurious extra digit: on (1,1)
// pairs the encoder also reports left_0, dragging the predicted sum from 2
// down to 1. The spurious logit sits near the decision boundary while every
// healthy concept keeps its full margin, so the intervention score's own
// confidence weighting is what has to surface the culprit.
EvalDump spurious_digit_dump(std::uint64_t seed) {
  const double margin = 4.0;
  const auto pair_bits = [](int a, int b) {
    std::vector<double> c(9, 0.0);
    c[static_cast<std::size_t>(a)] = 1.0;
    c[static_cast<std::size_t>(4 + b)] = 1.0;
    return c;
  };

  std::vector<std::vector<double>> truths;
  std::vector<int> labels;
  std::vector<bool> spurious;
  for (int s = 0; s < 60; ++s) {
    truths.push_back(pair_bits(1, 1));
    labels.push_back(2);
    spurious.push_back(true);
  }
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; b <= 3; ++b) {
      if (a == 1 && b == 1) continue;
      for (int s = 0; s < 30; ++s) {
        truths.push_back(pair_bits(a, b));
        labels.push_back(a + b);
        spurious.push_back(false);
      }
    }

  EvalDump dump;
  dump.n_samples = truths.size();
  dump.n_concepts = 9;
  dump.n_classes = 7;
  dump.predictor = sum_predictor(0, false);
  dump.concept_names = {"left_0",  "left_1",  "left_2",  "left_3", "right_0",
                        "right_1", "right_2", "right_3", "red"};
  for (int s = 0; s <= 6; ++s)
    dump.class_names.push_back("sum_" + std::to_string(s));
  dump.concept_logits = Matrix(dump.n_samples, 9);
  dump.concepts_true = Matrix(dump.n_samples, 9);
  dump.labels_true = labels;

  Rng rng(seed);
  for (std::size_t n = 0; n < dump.n_samples; ++n) {
    for (std::size_t i = 0; i < 9; ++i) {
      dump.concepts_true(n, i) = truths[n][i];
      dump.concept_logits(n, i) =
          margin * (2.0 * truths[n][i] - 1.0) + rng.normal(0.0, 1.0);
    }
    if (spurious[n]) dump.concept_logits(n, 0) = std::abs(rng.normal(1.0, 0.5));
  }
  dump.validate();
  return dump;
}

Verdict check_turbulence() {
  // Ignored concepts (all-zero predictor columns) score exactly zero and are
  // never selected while enough positive-scoring concepts exist.
  MnistSumOptions opts;
  opts.distractor_concepts = 4;
  const EvalDump dump = generate(mnist_sum_config(7, opts));
  const ErrorSet errs = error_set(dump);
  const EctpTable table = classwise_ectp(dump, errs);

  std::vector<std::size_t> ignored;
  for (std::size_t i = 0; i < dump.n_concepts; ++i) {
    bool zero = true;
    for (std::size_t l = 0; l < dump.n_classes; ++l)
      if (dump.predictor.weights(l, i) != 0.0) zero = false;
    if (zero) ignored.push_back(i);
  }

  bool zeros_exact = !ignored.empty();
  for (std::size_t l = 0; l < dump.n_classes; ++l)
    for (std::size_t i : ignored)
      if (table.scores(l, i) != 0.0) zeros_exact = false;

  const int t_e = 4;
  const ConceptFilter filter = select_error_prone(table, t_e);
  bool never_selected = true;
  for (std::size_t l = 0; l < dump.n_classes; ++l) {
    if (!table.has_errors[l]) continue;
    int positive = 0;
    for (std::size_t i = 0; i < dump.n_concepts; ++i)
      if (table.scores(l, i) > 0.0) ++positive;
    if (positive < t_e) continue;
    for (std::size_t pick : filter.per_class_top[l])
      if (std::find(ignored.begin(), ignored.end(), pick) != ignored.end())
        never_selected = false;
  }

  // The planted spurious digit must surface in the top three scores of its
  // class row.
  int top3_hits = 0;
  const int seeds = 5;
  for (int seed = 1; seed <= seeds; ++seed) {
    const EvalDump planted_dump = spurious_digit_dump(seed);
    const ErrorSet planted_errs = error_set(planted_dump);
    const EctpTable planted_table = classwise_ectp(planted_dump, planted_errs);
    std::vector<std::size_t> order(planted_dump.n_concepts);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return planted_table.scores(2, a) > planted_table.scores(2, b);
    });
    const bool in_top3 = order[0] == 0 || order[1] == 0 || order[2] == 0;
    top3_hits += in_top3 ? 1 : 0;
  }

  return {zeros_exact && never_selected && top3_hits == seeds,
          fmt("ignored columns exact-zero %s, never selected %s, decisive concept "
              "top-3 in %d/%d seeds",
              zeros_exact ? "yes" : "NO", never_selected ? "yes" : "NO", top3_hits,
              seeds)};
}

// ---------------------------------------------------------------------------
// Criterion 6: the one concept separating two planted patterns becomes the
// top keyword of both discovered slices.

// Two planted error patterns in a four-concept dump. Every sample fails the
// same way (the trigger concept reads as absent), only the red concept tells
// the patterns apart, and the remaining two concepts are inert.
SynthConfig split_pair_config(std::uint64_t seed) {
  SynthConfig config;
  config.seed = seed;
  config.predictor.weights = Matrix(2, 4);
  config.predictor.weights(1, 0) = 2.0;
  config.predictor.bias = {0.0, -1.0};
  config.concept_names = {"trigger", "red", "glare", "blur"};
  config.class_names = {"benign", "flagged"};
  // Component variances are estimated from the members of each pattern, and
  // the keyword probes sit far outside the data where (x - mean)^2 magnifies
  // any variance mismatch between components. 160 members per pattern keeps
  // that estimation noise too small to flip a probe on an inert concept.
  const std::vector<double> flips = {1.0, 0.0, 0.0, 0.0};
  config.groups.push_back({"pattern_plain", {1.0, 0.0, 0.0, 0.0}, 1, 160, flips, 0});
  config.groups.push_back({"pattern_red", {1.0, 1.0, 0.0, 0.0}, 1, 160, flips, 1});
  return config;
}

Verdict check_keywords() {
  int hits = 0;
  const int seeds = 5;
  const std::size_t separating = 1;  // the "red" concept
  for (int seed = 1; seed <= seeds; ++seed) {
    const EvalDump dump = generate(split_pair_config(seed));
    const ErrorSet errs = error_set(dump);
    TrainConfig config;
    config.t_g = 2;
    config.lambda = 15.0;
    config.seed = seed;
    const SliceModel model =
        fit_slices(dump, errs, all_concepts_filter(dump), config);
    const SliceAssignment assign = build_assignment(model, dump, errs);
    const std::vector<SliceExplanation> slices =
        explain_slices(model, dump, errs, assign);
    bool seed_ok = slices.size() == 2;
    for (const SliceExplanation& s : slices)
      if (s.keywords.empty() || s.keywords.front().concept_index != separating)
        seed_ok = false;
    hits += seed_ok ? 1 : 0;
  }
  return {hits >= 4, fmt("separating concept rank-1 in %d/%d seeds", hits, seeds)};
}

// ---------------------------------------------------------------------------
// Criterion 7: ablations keep their expected order.

Verdict check_ablations() {
  const int seeds = 3;

  // (a) concept filtering on vs off, with noise concepts in the dump.
  double p10_on = 0.0, p10_off = 0.0;
  for (int seed = 1; seed <= seeds; ++seed) {
    MnistSumOptions opts;
    opts.distractor_concepts = 6;
    const EvalDump dump = generate(mnist_sum_config(seed, opts));
    TrainConfig config;
    config.t_g = 10;
    config.lambda = 15.0;
    config.seed = seed;
    p10_on += run_pipeline(dump, true, 4, config).report.precision_at_10;
    p10_off += run_pipeline(dump, false, 4, config).report.precision_at_10;
  }
  p10_on /= seeds;
  p10_off /= seeds;

  // (b) full objective vs density term alone.
  double p10_full = 0.0, p10_densityonly = 0.0;
  for (int seed = 1; seed <= seeds; ++seed) {
    const EvalDump dump = generate(mnist_sum_config(seed));
    TrainConfig config;
    config.t_g = 10;
    config.lambda = 15.0;
    config.seed = seed;
    p10_full += run_pipeline(dump, true, 10, config).report.precision_at_10;
    TrainConfig density = config;
    density.enable_true_loss = false;
    density.enable_pred_loss = false;
    p10_densityonly += run_pipeline(dump, true, 10, density).report.precision_at_10;
  }
  p10_full /= seeds;
  p10_densityonly /= seeds;

  // (c) mixture slicer vs linear slicer on the auxiliary decoding accuracies.
  double gmm_true = 0.0, gmm_pred = 0.0, lin_true = 0.0, lin_pred = 0.0;
  for (int seed = 1; seed <= seeds; ++seed) {
    const EvalDump dump = generate(mnist_sum_config(seed));
    TrainConfig config;
    config.t_g = 10;
    config.lambda = 15.0;
    config.seed = seed;
    const PipelineRun gmm_run = run_pipeline(dump, true, 10, config);
    const PipelineRun lin_run = run_pipeline(dump, true, 10, config, true);
    gmm_true += gmm_run.model.history.back().acc_true;
    gmm_pred += gmm_run.model.history.back().acc_pred;
    lin_true += lin_run.model.history.back().acc_true;
    lin_pred += lin_run.model.history.back().acc_pred;
  }
  gmm_true /= seeds;
  gmm_pred /= seeds;
  lin_true /= seeds;
  lin_pred /= seeds;

  const bool ok = p10_on >= p10_off && p10_full >= p10_densityonly &&
                  gmm_true >= lin_true && gmm_pred >= lin_pred;
  return {ok,
          fmt("filter %.3f vs %.3f; full %.3f vs %.3f; acc %.3f/%.3f vs %.3f/%.3f",
              p10_on, p10_off, p10_full, p10_densityonly, gmm_true, gmm_pred,
              lin_true, lin_pred)};
}

// ---------------------------------------------------------------------------
// Criterion 8: slice scores stay inside their ranges; informativeness rises
// strictly with effective size.

Verdict check_score_bounds() {
  Rng rng(808);
  double excursion = 0.0;
  int checked = 0;
  while (checked < kFuzzSlices) {
    const std::size_t n = 5 + rng.uniform_int(36);
    const std::size_t n_classes = 2 + rng.uniform_int(5);
    const std::size_t t_g = 1 + rng.uniform_int(4);
    const std::size_t dims = 1 + rng.uniform_int(4);

    SliceAssignment assign;
    assign.posteriors = Matrix(n, t_g);
    for (std::size_t r = 0; r < n; ++r) {
      double z = 0.0;
      for (std::size_t j = 0; j < t_g; ++j) {
        assign.posteriors(r, j) = std::exp(rng.normal(0.0, 2.0));
        z += assign.posteriors(r, j);
      }
      for (std::size_t j = 0; j < t_g; ++j) assign.posteriors(r, j) /= z;
    }
    assign.hard_slice.resize(n);
    assign.predicted.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < t_g; ++j)
        if (assign.posteriors(r, j) > assign.posteriors(r, best)) best = j;
      assign.hard_slice[r] = static_cast<int>(best);
      assign.predicted[r] = static_cast<int>(rng.uniform_int(n_classes));
    }
    Matrix feats(n, dims);
    for (double& v : feats.data()) v = rng.normal(0.0, 3.0);

    for (std::size_t j = 0; j < t_g && checked < kFuzzSlices; ++j) {
      if (ref_members(assign, j).empty()) continue;
      const double mc = misprediction_coherence(assign, j, n_classes);
      const double sc = semantic_compactness(assign, feats, j);
      const double si =
          slice_informativeness(mc, sc, effective_size(assign, j), 5.0);
      excursion = std::max({excursion, -mc, mc - 1.0, -1.0 - sc, sc - 1.0, -si,
                            si - 1.0});
      ++checked;
    }
  }

  bool monotone = true;
  for (int trial = 0; trial < 50; ++trial) {
    const double mc = rng.uniform(0.05, 1.0);
    const double sc = rng.uniform(-0.9, 1.0);
    double prev = slice_informativeness(mc, sc, 0.25, 5.0);
    for (double n_eff = 0.5; n_eff <= 64.0; n_eff *= 2.0) {
      const double cur = slice_informativeness(mc, sc, n_eff, 5.0);
      if (cur <= prev) monotone = false;
      prev = cur;
    }
  }

  return {excursion < kBoundExcursion && monotone,
          fmt("%d slices, worst excursion %.2e, monotone %s", checked, excursion,
              monotone ? "yes" : "NO")};
}

// ---------------------------------------------------------------------------
// Criterion 9: slice-count sweep keeps the metric flat past the true count
// and the final loss non-increasing.

Verdict check_sweep() {
  const EvalDump dump = generate(split_pair_config(3));
  const ErrorSet errs = error_set(dump);
  const ConceptFilter filter = all_concepts_filter(dump);

  std::vector<double> p10, loss;
  for (int t = 1; t <= 6; ++t) {
    TrainConfig config;
    config.t_g = t;
    config.lambda = 15.0;
    config.seed = 11;
    const SliceModel model = fit_slices(dump, errs, filter, config);
    const SliceAssignment assign = build_assignment(model, dump, errs);
    p10.push_back(
        evaluate_discovery(assign, truth_rows(dump, errs)).precision_at_10);
    const EpochStats& last = model.history.back();
    loss.push_back(last.l_gmm + config.lambda * (last.l_true + last.l_pred));
  }

  const double best = *std::max_element(p10.begin(), p10.end());
  bool flat = true;
  for (std::size_t i = 1; i < p10.size(); ++i)
    if (p10[i] < best - kSweepP10Slack) flat = false;
  bool decreasing = true;
  for (std::size_t i = 1; i < loss.size(); ++i)
    if (loss[i] > loss[i - 1] + kSweepLossSlack * std::abs(loss[i - 1]))
      decreasing = false;

  return {flat && decreasing,
          fmt("P@10 %.2f..%.2f (max %.2f), loss %.1f..%.1f, flat %s, "
              "non-increasing %s",
              p10[1], p10.back(), best, loss.front(), loss.back(),
              flat ? "yes" : "NO", decreasing ? "yes" : "NO")};
}

// ---------------------------------------------------------------------------
// Criterion 10: reruns under the same seed are byte-identical; dumps survive
// a write, read, write cycle unchanged.

// The commands narrate to the console; the gate only needs their artifacts.
struct MuteStreams {
  std::streambuf* out = std::cout.rdbuf();
  std::streambuf* err = std::cerr.rdbuf();
  std::ostringstream sink;
  MuteStreams() {
    std::cout.rdbuf(sink.rdbuf());
    std::cerr.rdbuf(sink.rdbuf());
  }
  ~MuteStreams() {
    std::cout.rdbuf(out);
    std::cerr.rdbuf(err);
  }
};

Verdict check_determinism() {
  const fs::path base = fs::temp_directory_path() / "cbslice_acceptance";
  fs::remove_all(base);
  fs::create_directories(base);

  MnistSumOptions opts;
  opts.scale = 0.5;
  const EvalDump dump = generate(mnist_sum_config(5, opts));
  const fs::path d1 = base / "dump1";
  const fs::path d2 = base / "dump2";
  write_dump(dump, d1);
  write_dump(read_dump(d1), d2);

  bool dump_ok = true;
  std::set<std::string> names;
  for (const auto& entry : fs::directory_iterator(d1))
    names.insert(entry.path().filename().string());
  std::set<std::string> names2;
  for (const auto& entry : fs::directory_iterator(d2))
    names2.insert(entry.path().filename().string());
  if (names != names2 || names.empty()) dump_ok = false;
  for (const std::string& name : names)
    if (dump_ok && !same_files(d1 / name, d2 / name)) dump_ok = false;

  const auto one_run = [&](const std::string& tag) {
    const fs::path out = base / tag;
    DiscoverArgs discover;
    discover.dump_dir = d1;
    discover.out_dir = out;
    discover.seed = 21;
    if (cmd_discover(discover) != 0) return false;
    ExplainArgs explain;
    explain.dump_dir = d1;
    explain.model_path = out / "model.json";
    explain.out_path = out / "slices.json";
    if (cmd_explain(explain) != 0) return false;
    RankArgs rank;
    rank.dump_dir = d1;
    rank.model_path = out / "model.json";
    rank.out_path = out / "ranking.json";
    if (cmd_rank(rank) != 0) return false;
    ReportArgs report;
    report.slices_path = out / "slices.json";
    report.ranking_path = out / "ranking.json";
    report.out_path = out / "report.md";
    return cmd_report(report) == 0;
  };
  bool ran = false;
  {
    MuteStreams mute;
    ran = one_run("a") && one_run("b");
  }
  const bool model_ok =
      ran && same_files(base / "a" / "model.json", base / "b" / "model.json");
  const bool report_ok =
      ran && same_files(base / "a" / "report.md", base / "b" / "report.md");

  fs::remove_all(base);
  return {dump_ok && model_ok && report_ok,
          fmt("dump round-trip %s, model.json %s, report.md %s",
              dump_ok ? "identical" : "DIFFERS", model_ok ? "identical" : "DIFFERS",
              report_ok ? "identical" : "DIFFERS")};
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    Verdict (*run)();
  };
  const Entry entries[] = {
      {"analytic gradients match finite differences", check_gradients},
      {"fuzzed posterior rows stay normalised", check_normalisation},
      {"scores match brute-force references", check_oracles},
      {"planted failure modes recovered", check_recovery},
      {"turbulence zeros and decisive concept", check_turbulence},
      {"separating concept is the top keyword", check_keywords},
      {"ablations keep the expected order", check_ablations},
      {"score bounds and monotone informativeness", check_score_bounds},
      {"slice-count sweep stays stable", check_sweep},
      {"byte-identical reruns and round-trips", check_determinism},
  };

  std::printf("release gate: %zu criteria\n\n", std::size(entries));
  int failures = 0;
  int index = 0;
  for (const Entry& entry : entries) {
    ++index;
    Verdict verdict{false, "threw"};
    try {
      verdict = entry.run();
    } catch (const std::exception& e) {
      verdict.detail = fmt("threw: %s", e.what());
    }
    std::printf("  %s [%2d] %-44s %s%s\n", verdict.ok ? "✓" : "✗", index,
                entry.name, verdict.detail.c_str(), verdict.ok ? "" : " FAILED");
    if (!verdict.ok) ++failures;
  }

  std::printf("\n%d/%zu criteria passed\n", index - failures, std::size(entries));
  return failures == 0 ? 0 : 1;
}

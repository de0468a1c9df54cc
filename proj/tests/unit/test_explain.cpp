#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "cbslice/errors.hpp"
#include "cbslice/explain.hpp"
#include "cbslice/model.hpp"
#include "cbslice/numerics.hpp"
#include "cbslice/prioritize.hpp"

using namespace cbslice;

namespace {

// Two mixture components separated along dimension 0 only; dimension 1 is
// identical across components, so it can never move the posterior.
SliceModel split_model(std::size_t t_g = 2) {
  SliceModel model;
  model.params.variant = SliceVariant::gmm;
  model.params.gmm.means = Matrix(t_g, 2);
  model.params.gmm.means(0, 0) = -3.0;
  model.params.gmm.means(1, 0) = 3.0;
  if (t_g > 2) model.params.gmm.means(2, 1) = 1000.0;  // unreachable component
  model.params.gmm.log_vars = Matrix(t_g, 2);
  model.params.gmm.weight_logits.assign(t_g, 0.0);
  model.params.aux.true_head.weights = Matrix(2, t_g);
  model.params.aux.true_head.bias.assign(2, 0.0);
  model.params.aux.pred_head.weights = Matrix(2, t_g);
  model.params.aux.pred_head.bias.assign(2, 0.0);
  model.c_err = {0, 1};
  return model;
}

// Every sample mispredicts: the head always answers class 1, labels are 0.
EvalDump split_dump() {
  EvalDump d;
  d.n_samples = 4;
  d.n_concepts = 2;
  d.n_classes = 2;
  d.concept_logits = Matrix::from_rows(
      {{-3.0, 1.0}, {-2.5, -1.0}, {3.0, 1.0}, {2.5, -1.0}});
  // Concept 0 truly absent on the left pair, truly present on the right;
  // concept 1 truth disagrees with the prediction for the left pair.
  d.concepts_true = Matrix::from_rows(
      {{0.0, 0.0}, {0.0, 0.0}, {1.0, 1.0}, {1.0, 0.0}});
  d.labels_true = {0, 0, 0, 0};
  d.predictor.weights = Matrix(2, 2);
  d.predictor.bias = {0.0, 1.0};
  d.concept_names = {"alpha", "beta"};
  d.class_names = {"good", "bad"};
  d.validate();
  return d;
}

// Posterior of the hand-built model computed from scratch.
std::vector<double> reference_posterior(const GmmParams& gmm,
                                        const std::vector<double>& h) {
  std::vector<double> a(gmm.components());
  for (std::size_t j = 0; j < a.size(); ++j) {
    double s = gmm.weight_logits[j];
    for (std::size_t d = 0; d < gmm.dims(); ++d) {
      double lv = gmm.log_vars(j, d);
      double diff = h[d] - gmm.means(j, d);
      s -= 0.5 * (std::log(2.0 * std::acos(-1.0)) + lv +
                  diff * diff * std::exp(-lv));
    }
    a[j] = s;
  }
  return softmax(a);
}

double reference_ecsa(const SliceModel& model, std::vector<double> h,
                      std::size_t i, double eps) {
  const std::vector<double> base = reference_posterior(model.params.gmm, h);
  const double p = 1.0 / (1.0 + std::exp(-h[i]));

  std::vector<double> probe = h;
  probe[i] = std::log(eps / (1.0 - eps));
  const std::vector<double> off = reference_posterior(model.params.gmm, probe);
  probe[i] = std::log((1.0 - eps) / eps);
  const std::vector<double> on = reference_posterior(model.params.gmm, probe);

  auto kl = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j)
      if (a[j] > 0.0) s += a[j] * std::log(a[j] / b[j]);
    return s;
  };
  return (1.0 - p) * kl(off, base) + p * kl(on, base);
}

}  // namespace

TEST_CASE("ecsa_score matches an independent reimplementation") {
  SliceModel model = split_model();
  std::vector<std::vector<double>> points = {
      {-3.0, 1.0}, {0.5, -0.5}, {2.0, 2.0}, {20.0, -20.0}};
  for (const auto& h : points)
    for (std::size_t i = 0; i < 2; ++i)
      CHECK(ecsa_score(model, h, i, 0) ==
            doctest::Approx(reference_ecsa(model, h, i, 1e-4)).epsilon(1e-10));
}

TEST_CASE("a concept the mixture ignores scores essentially zero") {
  SliceModel model = split_model();
  std::vector<double> h = {-2.0, 0.7};
  double separating = ecsa_score(model, h, 0, 0);
  double inert = ecsa_score(model, h, 1, 0);
  CHECK(separating > 0.01);
  CHECK(inert < 1e-12);
}

TEST_CASE("ecsa_score stays finite when the posterior saturates") {
  SliceModel model = split_model();
  // At this magnitude the losing component's posterior underflows to zero;
  // the score must come out finite and non-negative all the same.
  for (const auto& h : std::vector<std::vector<double>>{
           {1e3, 0.0}, {-1e3, 0.0}, {750.0, -750.0}}) {
    for (std::size_t i = 0; i < 2; ++i) {
      for (EcsaPosterior mode : {EcsaPosterior::full, EcsaPosterior::marginal}) {
        double score = ecsa_score(model, h, i, 0, 1e-4, mode);
        CHECK(std::isfinite(score));
        CHECK(score >= -1e-12);
      }
    }
  }
}

TEST_CASE("marginal mode equals full mode for a two-component model") {
  SliceModel model = split_model();
  std::vector<double> h = {-1.0, 0.3};
  for (std::size_t j : {std::size_t{0}, std::size_t{1}}) {
    double full = ecsa_score(model, h, 0, j, 1e-4, EcsaPosterior::full);
    double marginal = ecsa_score(model, h, 0, j, 1e-4, EcsaPosterior::marginal);
    CHECK(marginal == doctest::Approx(full).epsilon(1e-9));
  }
}

TEST_CASE("ecsa_score validates its arguments") {
  SliceModel model = split_model();
  std::vector<double> h = {-1.0, 0.3};
  std::vector<double> wrong = {-1.0};
  CHECK_THROWS_AS(ecsa_score(model, wrong, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(ecsa_score(model, h, 2, 0), std::invalid_argument);
  CHECK_THROWS_AS(ecsa_score(model, h, 0, 5), std::invalid_argument);
}

TEST_CASE("keyword_concepts surfaces the separating concept first") {
  SliceModel model = split_model();
  EvalDump dump = split_dump();
  ErrorSet errs = error_set(dump);
  REQUIRE(errs.size() == 4);
  SliceAssignment assign = build_assignment(model, dump, errs);

  // Samples 0 and 1 sit on the left component, 2 and 3 on the right.
  CHECK(assign.hard_slice == std::vector<int>{0, 0, 1, 1});

  SliceExplanation left = keyword_concepts(model, dump, errs, assign, 0, 2);
  REQUIRE(left.keywords.size() == 2);
  CHECK(left.keywords[0].name == "alpha");
  CHECK(left.keywords[0].mean_score > left.keywords[1].mean_score);
  // Left members have negative alpha logits: predicted absent, truly absent.
  CHECK_FALSE(left.keywords[0].predicted_present);
  CHECK(left.keywords[0].correct);

  SliceExplanation right = keyword_concepts(model, dump, errs, assign, 1, 2);
  CHECK(right.keywords[0].name == "alpha");
  CHECK(right.keywords[0].predicted_present);
  CHECK(right.keywords[0].correct);

  // Beta is predicted present on the right pair's weighted majority but
  // truly absent for sample 3; dominance still says present-true via sample 2.
  const KeywordConcept& beta = right.keywords[1];
  CHECK(beta.name == "beta");
}

TEST_CASE("keyword flags a concept whose dominant truth disagrees") {
  SliceModel model = split_model();
  EvalDump dump = split_dump();
  // Make beta truly absent for the whole right pair while its logits stay
  // positive on sample 2: dominant prediction present, dominant truth absent.
  dump.concepts_true(2, 1) = 0.0;
  ErrorSet errs = error_set(dump);
  SliceAssignment assign = build_assignment(model, dump, errs);
  SliceExplanation right = keyword_concepts(model, dump, errs, assign, 1, 2);
  const KeywordConcept& beta = right.keywords[1];
  REQUIRE(beta.name == "beta");
  CHECK_FALSE(beta.correct);
}

TEST_CASE("exemplars are ordered by membership posterior") {
  SliceModel model = split_model();
  EvalDump dump = split_dump();
  ErrorSet errs = error_set(dump);
  SliceAssignment assign = build_assignment(model, dump, errs);

  SliceExplanation left = keyword_concepts(model, dump, errs, assign, 0, 2);
  REQUIRE(left.exemplars.size() == 2);
  // Sample 0 sits exactly on the left mean, so its posterior beats sample 1.
  CHECK(left.exemplars[0] == 0);
  CHECK(left.exemplars[1] == 1);

  SliceExplanation capped =
      keyword_concepts(model, dump, errs, assign, 0, 2, 1e-4, EcsaPosterior::full, 1);
  CHECK(capped.exemplars.size() == 1);
}

TEST_CASE("explain_slices covers exactly the non-empty slices") {
  SliceModel model = split_model(3);
  EvalDump dump = split_dump();
  ErrorSet errs = error_set(dump);
  SliceAssignment assign = build_assignment(model, dump, errs);

  auto out = explain_slices(model, dump, errs, assign, 2);
  REQUIRE(out.size() == 2);
  CHECK(out[0].slice_id == 0);
  CHECK(out[1].slice_id == 1);

  CHECK_THROWS_AS(keyword_concepts(model, dump, errs, assign, 2, 2),
                  PreconditionError);
  CHECK_THROWS_AS(keyword_concepts(model, dump, errs, assign, 0, 0),
                  std::invalid_argument);
}

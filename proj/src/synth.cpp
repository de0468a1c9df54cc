#include "cbslice/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "cbslice/errors.hpp"
#include "cbslice/rng.hpp"

namespace cbslice {

namespace {

constexpr std::size_t kDigits = 4;
constexpr std::size_t kBaseConcepts = 2 * kDigits + 1;  // two digits + red
constexpr std::size_t kClasses = 7;                     // sums 0..6

std::vector<double> pair_concepts(std::size_t a, std::size_t b, bool red) {
  std::vector<double> c(kBaseConcepts, 0.0);
  c[a] = 1.0;
  c[kDigits + b] = 1.0;
  c[2 * kDigits] = red ? 1.0 : 0.0;
  return c;
}

std::size_t scaled(std::size_t count, double scale) {
  const auto n = static_cast<std::size_t>(std::llround(count * scale));
  return n > 0 ? n : 1;
}

std::vector<std::string> mnist_concept_names(int n_distractors) {
  std::vector<std::string> names;
  for (std::size_t d = 0; d < kDigits; ++d)
    names.push_back("left_" + std::to_string(d));
  for (std::size_t d = 0; d < kDigits; ++d)
    names.push_back("right_" + std::to_string(d));
  names.push_back("red");
  for (int d = 0; d < n_distractors; ++d)
    names.push_back("noise_" + std::to_string(d));
  return names;
}

std::vector<std::string> sum_class_names() {
  std::vector<std::string> names;
  for (std::size_t l = 0; l < kClasses; ++l)
    names.push_back("sum_" + std::to_string(l));
  return names;
}

}  // namespace

LinearPredictor sum_predictor(int n_distractors, bool corrupt_rare) {
  if (n_distractors < 0)
    throw std::invalid_argument("sum_predictor: negative distractor count");
  LinearPredictor p;
  p.weights = Matrix(kClasses, kBaseConcepts + static_cast<std::size_t>(n_distractors));
  p.bias.assign(kClasses, 0.0);
  for (std::size_t l = 0; l < kClasses; ++l) {
    for (std::size_t d = 0; d < kDigits; ++d) {
      const double half = l / 2.0 - static_cast<double>(d);
      p.weights(l, d) = -half * half;
      p.weights(l, kDigits + d) = -half * half;
    }
  }
  if (corrupt_rare)
    p.weights(4, 2) -= 2.0;
  return p;
}

EvalDump generate(const SynthConfig& config) {
  if (config.groups.empty())
    throw PreconditionError("generate: no groups");
  if (config.distractor_concepts < 0)
    throw PreconditionError("generate: negative distractor count");
  if (!(config.noise_sd >= 0.0))
    throw PreconditionError("generate: noise_sd must be non-negative");
  if (!(config.margin > 0.0))
    throw PreconditionError("generate: margin must be positive");

  const std::size_t k_base = config.groups.front().concepts.size();
  const std::size_t k = k_base + static_cast<std::size_t>(config.distractor_concepts);
  std::size_t n = 0;
  for (const auto& g : config.groups) {
    if (g.concepts.size() != k_base || g.flip_probs.size() != k_base)
      throw PreconditionError("generate: group '" + g.name + "' has wrong width");
    if (g.count == 0)
      throw PreconditionError("generate: group '" + g.name + "' is empty");
    for (double c : g.concepts)
      if (c != 0.0 && c != 1.0)
        throw PreconditionError("generate: group concepts must be 0 or 1");
    n += g.count;
  }

  EvalDump dump;
  dump.n_samples = n;
  dump.n_concepts = k;
  dump.n_classes = config.class_names.size();
  dump.concept_logits = Matrix(n, k);
  dump.concepts_true = Matrix(n, k);
  dump.labels_true.resize(n);
  dump.predictor = config.predictor;
  dump.concept_names = config.concept_names;
  dump.class_names = config.class_names;

  Rng rng(config.seed);
  std::vector<int> group_of(n);
  std::size_t row = 0;
  for (std::size_t g = 0; g < config.groups.size(); ++g) {
    const auto& group = config.groups[g];
    for (std::size_t s = 0; s < group.count; ++s, ++row) {
      group_of[row] = static_cast<int>(g);
      dump.labels_true[row] = group.label;
      for (std::size_t d = 0; d < k_base; ++d) {
        const bool flip = rng.bernoulli(group.flip_probs[d]);
        const double value = flip ? 1.0 - group.concepts[d] : group.concepts[d];
        dump.concept_logits(row, d) =
            config.margin * (2.0 * value - 1.0) + rng.normal(0.0, config.noise_sd);
        dump.concepts_true(row, d) = group.concepts[d];
      }
      for (std::size_t d = k_base; d < k; ++d) {
        const double value = rng.bernoulli(0.5) ? 1.0 : 0.0;
        dump.concept_logits(row, d) =
            config.margin * (2.0 * value - 1.0) + rng.normal(0.0, config.noise_sd);
        dump.concepts_true(row, d) = value;
      }
    }
  }

  // Annotate planted slices on the samples that actually come out wrong.
  const std::vector<int> preds = predicted_labels(dump);
  dump.slice_labels.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& group = config.groups[static_cast<std::size_t>(group_of[i])];
    if (group.slice_id >= 0 && preds[i] != dump.labels_true[i])
      dump.slice_labels[i] = group.slice_id;
  }

  dump.validate();
  return dump;
}

SynthConfig mnist_sum_config(std::uint64_t seed, const MnistSumOptions& opts) {
  SynthConfig config;
  config.seed = seed;
  config.margin = opts.margin;
  config.noise_sd = opts.noise_sd;
  config.distractor_concepts = opts.distractor_concepts;
  config.predictor = sum_predictor(opts.distractor_concepts, opts.corrupt_rare);
  config.concept_names = mnist_concept_names(opts.distractor_concepts);
  config.class_names = sum_class_names();

  const std::vector<double> no_flips(kBaseConcepts, 0.0);
  for (std::size_t a = 0; a < kDigits; ++a) {
    for (std::size_t b = 0; b < kDigits; ++b) {
      const int label = static_cast<int>(a + b);
      const std::string tag = std::to_string(a) + "_" + std::to_string(b);
      if (a == 1 && b == 1) {
        // Minority non-red subgroup with flipped left-digit concepts.
        std::vector<double> flips = no_flips;
        flips[0] = opts.flip_prob;
        flips[1] = opts.flip_prob;
        config.groups.push_back({"pair_" + tag + "_plain", pair_concepts(a, b, false),
                                 label, scaled(25, opts.scale), flips, 0});
        config.groups.push_back({"pair_" + tag + "_red", pair_concepts(a, b, true),
                                 label, scaled(225, opts.scale), no_flips, -1});
      } else if (a == 2 && b == 2) {
        // Rare pair that fails through the corrupted predictor row.
        config.groups.push_back({"pair_" + tag, pair_concepts(a, b, false), label,
                                 scaled(25, opts.scale), no_flips, 1});
      } else {
        config.groups.push_back({"pair_" + tag, pair_concepts(a, b, false), label,
                                 scaled(250, opts.scale), no_flips, -1});
      }
    }
  }
  return config;
}

SynthConfig two_pattern_config(std::uint64_t seed, const TwoPatternOptions& opts) {
  SynthConfig config;
  config.seed = seed;
  config.margin = opts.margin;
  config.noise_sd = opts.noise_sd;
  config.predictor = sum_predictor(0, false);
  config.concept_names = mnist_concept_names(0);
  config.class_names = sum_class_names();

  // Flipping both left-digit bits turns left digit 1 into digit 0, so the
  // head predicts sum 1 for the true (1,1) pair whose label is 2.
  std::vector<double> flips(kBaseConcepts, 0.0);
  flips[0] = 1.0;
  flips[1] = 1.0;
  config.groups.push_back({"pattern_plain", pair_concepts(1, 1, false), 2,
                           opts.pattern_count, flips, 0});
  config.groups.push_back({"pattern_red", pair_concepts(1, 1, true), 2,
                           opts.pattern_count, flips, 1});

  const std::vector<double> no_flips(kBaseConcepts, 0.0);
  for (std::size_t a = 0; a < kDigits; ++a)
    for (std::size_t b = 0; b < kDigits; ++b) {
      if (a == 1 && b == 1)
        continue;
      config.groups.push_back({"pair_" + std::to_string(a) + "_" + std::to_string(b),
                               pair_concepts(a, b, false), static_cast<int>(a + b),
                               opts.filler_count, no_flips, -1});
    }
  return config;
}

}  // namespace cbslice

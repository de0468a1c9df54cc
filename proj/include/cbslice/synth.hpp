#ifndef CBSLICE_SYNTH_HPP
#define CBSLICE_SYNTH_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cbslice/model.hpp"

namespace cbslice {

// One homogeneous group of synthetic samples. All members share the same true
// concept vector and label; flip_probs gives the per-concept chance that the
// emitted concept logit encodes the wrong value. Mispredicted members are
// annotated with slice_id unless it is -1.
struct GroupSpec {
  std::string name;
  std::vector<double> concepts;     // 0/1 per base concept
  int label;
  std::size_t count;
  std::vector<double> flip_probs;   // same length as concepts
  int slice_id = -1;
};

struct SynthConfig {
  std::vector<GroupSpec> groups;
  LinearPredictor predictor;               // covers base + distractor concepts
  std::vector<std::string> concept_names;  // base + distractor concepts
  std::vector<std::string> class_names;
  double margin = 4.0;     // |clean logit| of an emitted concept
  double noise_sd = 1.0;   // gaussian jitter added to every logit
  int distractor_concepts = 0;  // appended concepts with random truth, zero weight
  std::uint64_t seed = 0;
};

// Digit-sum label head over two one-hot digits 0..3 plus a final "red"
// concept the head ignores: W[l, digit d on either side] = -(l/2 - d)^2.
// For exact one-hot concepts the argmax is the digit sum with margin 1/2.
// corrupt_rare pushes class 4 away from left digit 2, so the (2,2) pair
// mispredicts as 3 while its concepts stay correct.
LinearPredictor sum_predictor(int n_distractors = 0, bool corrupt_rare = false);

// Sample every group in order. Per sample and base concept, a flip draw then
// a noise draw; distractor concepts follow with a value draw then a noise
// draw. Emitted logits are margin * (2v - 1) + noise for the possibly
// flipped value v; true concepts are never flipped.
EvalDump generate(const SynthConfig& config);

struct MnistSumOptions {
  double scale = 1.0;          // multiplies every group count
  double flip_prob = 0.95;     // concept-flip rate of the failing subgroup
  bool corrupt_rare = true;
  int distractor_concepts = 0;
  double noise_sd = 1.0;
  double margin = 4.0;
};

// Digit-sum validation set with two planted failure modes: the rare (2,2)
// pair (annotated slice 1, fails through the corrupted predictor row) and
// the non-red minority of the (1,1) pair (annotated slice 0, fails through
// flipped left-digit concepts). The red majority of (1,1) and the other 14
// pairs predict cleanly.
SynthConfig mnist_sum_config(std::uint64_t seed, const MnistSumOptions& opts = {});

struct TwoPatternOptions {
  std::size_t pattern_count = 40;  // per failing pattern
  std::size_t filler_count = 30;   // per clean pair group
  double noise_sd = 1.0;
  double margin = 4.0;
};

// Two failing groups whose feature distributions differ only in the "red"
// concept (annotated slices 0 and 1), on top of clean filler pairs. Both
// groups fail by having the left digit's one-hot flipped from 1 to 0.
SynthConfig two_pattern_config(std::uint64_t seed, const TwoPatternOptions& opts = {});

}  // namespace cbslice

#endif

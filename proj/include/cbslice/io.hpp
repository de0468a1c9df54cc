#ifndef CBSLICE_IO_HPP
#define CBSLICE_IO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cbslice/eval.hpp"
#include "cbslice/explain.hpp"
#include "cbslice/filter.hpp"
#include "cbslice/model.hpp"
#include "cbslice/prioritize.hpp"
#include "cbslice/slicing.hpp"

namespace cbslice {

// On-disk prediction dump: meta.json plus little-endian binary blobs
//   concept_logits.f32     n_samples x n_concepts, row-major
//   concepts_true.u8       n_samples x n_concepts
//   labels_true.u32        n_samples
//   predictor_weights.f32  n_classes x n_concepts, row-major
//   predictor_bias.f32     n_classes
//   slice_labels.i32       n_samples, only when annotations exist (-1 = none)
void write_dump(const EvalDump& dump, const std::filesystem::path& dir);
EvalDump read_dump(const std::filesystem::path& dir);

// Full run configuration. Files use a flat key = value TOML subset; unknown
// keys are rejected.
struct RunConfig {
  TrainConfig train;
  int t_e = 10;
  int t_k = 5;
  double tau = 5.0;
  double logit_eps = 1e-6;
  double ecsa_eps = 1e-4;
  EcsaPosterior ecsa_posterior = EcsaPosterior::full;
  SliceVariant variant = SliceVariant::gmm;
  bool no_filter = false;
  int exemplars = 5;

  void validate() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

// Synthetic-dump configuration for the CLI.
struct SynthRunConfig {
  std::string preset = "mnist_sum";  // or "two_pattern"
  double scale = 1.0;
  double flip_prob = 0.95;
  bool corrupt_rare = true;
  int distractor_concepts = 0;
  double noise_sd = 1.0;
  double margin = 4.0;
  int pattern_count = 40;
  int filler_count = 30;
  std::uint64_t seed = 0;

  void validate() const;
};

SynthRunConfig parse_synth_config(const std::string& text);
SynthRunConfig load_synth_config(const std::filesystem::path& path);

// 16-hex-digit FNV-1a fingerprint of the effective configuration (seed
// excluded; the effective seed is recorded next to it in every artifact).
std::string config_fingerprint(const RunConfig& config);

// Provenance block stamped into every artifact.
struct ArtifactMeta {
  std::string config_hash;
  std::uint64_t seed = 0;
};

void write_filter_json(const std::filesystem::path& path, const ConceptFilter& filter,
                       const ArtifactMeta& meta);
void write_model_json(const std::filesystem::path& path, const SliceModel& model,
                      const ArtifactMeta& meta);
SliceModel read_model_json(const std::filesystem::path& path);
void write_history_csv(const std::filesystem::path& path,
                       const std::vector<EpochStats>& history);
void write_slices_json(const std::filesystem::path& path,
                       const std::vector<SliceExplanation>& slices, int t_k,
                       EcsaPosterior mode, const ArtifactMeta& meta);
void write_ranking_json(const std::filesystem::path& path,
                        const std::vector<SliceScore>& scores, double tau,
                        const ArtifactMeta& meta);
void write_metrics_json(const std::filesystem::path& path, const MetricReport& report,
                        const ArtifactMeta& meta);

struct SweepRow {
  int t_g;
  EpochStats final_stats;
  std::optional<double> p10;
  std::optional<double> mgf;
};
void write_sweep_csv(const std::filesystem::path& path,
                     const std::vector<SweepRow>& rows);

// Render report.md from the slices and ranking artifacts.
void write_report_md(const std::filesystem::path& path,
                     const std::filesystem::path& slices_json,
                     const std::filesystem::path& ranking_json);

}  // namespace cbslice

#endif

#include "cbslice/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <iostream>

#include "cbslice/errors.hpp"
#include "cbslice/eval.hpp"
#include "cbslice/explain.hpp"
#include "cbslice/filter.hpp"
#include "cbslice/io.hpp"
#include "cbslice/prioritize.hpp"
#include "cbslice/slicing.hpp"
#include "cbslice/synth.hpp"

namespace cbslice {

namespace {

RunConfig load_run(const std::filesystem::path& path) {
  if (path.empty()) {
    RunConfig config;
    config.validate();
    return config;
  }
  return load_run_config(path);
}

SynthRunConfig load_synth(const std::filesystem::path& path) {
  if (path.empty()) {
    SynthRunConfig config;
    config.validate();
    return config;
  }
  return load_synth_config(path);
}

struct PreparedDump {
  EvalDump dump;
  ErrorSet errs;
};

PreparedDump prepare(const std::filesystem::path& dump_dir) {
  PreparedDump p;
  p.dump = read_dump(dump_dir);
  p.errs = error_set(p.dump);
  if (p.errs.indices.empty())
    throw PreconditionError("dump has no mispredicted samples");
  return p;
}

ConceptFilter build_filter(const PreparedDump& p, const RunConfig& config,
                           bool no_filter_flag) {
  if (config.no_filter || no_filter_flag)
    return all_concepts_filter(p.dump);
  const ConceptFilter filter =
      select_error_prone(classwise_ectp(p.dump, p.errs), config.t_e);
  for (const auto& w : filter.warnings)
    std::cerr << "warning: " << w << "\n";
  return filter;
}

std::vector<int> truth_over_errors(const PreparedDump& p) {
  if (!p.dump.has_slice_labels())
    throw PreconditionError("dump has no slice annotations");
  std::vector<int> truth(p.errs.indices.size());
  for (std::size_t n = 0; n < p.errs.indices.size(); ++n)
    truth[n] = p.dump.slice_labels[p.errs.indices[n]];
  return truth;
}

}  // namespace

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag,
                           std::uint64_t config_seed) {
  if (flag)
    return *flag;
  if (const char* env = std::getenv("CBSLICE_SEED")) {
    const std::string text = env;
    std::uint64_t value = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
      throw ConfigError("CBSLICE_SEED must be a non-negative integer");
    return value;
  }
  return config_seed;
}

int run_command(const std::function<void()>& fn) {
  try {
    fn();
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPrecondition;
  }
}

int cmd_synth(const SynthArgs& args) {
  return run_command([&] {
    SynthRunConfig config = load_synth(args.config);
    config.seed = resolve_seed(args.seed, config.seed);

    SynthConfig sc;
    if (config.preset == "mnist_sum") {
      MnistSumOptions opts;
      opts.scale = config.scale;
      opts.flip_prob = config.flip_prob;
      opts.corrupt_rare = config.corrupt_rare;
      opts.distractor_concepts = config.distractor_concepts;
      opts.noise_sd = config.noise_sd;
      opts.margin = config.margin;
      sc = mnist_sum_config(config.seed, opts);
    } else {
      TwoPatternOptions opts;
      opts.pattern_count = static_cast<std::size_t>(config.pattern_count);
      opts.filler_count = static_cast<std::size_t>(config.filler_count);
      opts.noise_sd = config.noise_sd;
      opts.margin = config.margin;
      sc = two_pattern_config(config.seed, opts);
    }

    const EvalDump dump = generate(sc);
    write_dump(dump, args.out_dir);
    const ErrorSet errs = error_set(dump);
    std::cout << "wrote " << dump.n_samples << " samples (" << dump.n_concepts
              << " concepts, " << dump.n_classes << " classes, " << errs.size()
              << " mispredicted) to " << args.out_dir.string() << "\n";
  });
}

int cmd_filter(const FilterArgs& args) {
  return run_command([&] {
    const RunConfig config = load_run(args.config);
    const std::uint64_t seed = resolve_seed(args.seed, config.train.seed);
    const PreparedDump p = prepare(args.dump_dir);
    const ConceptFilter filter = build_filter(p, config, false);
    write_filter_json(args.out_path, filter, {config_fingerprint(config), seed});
    std::cout << "selected " << filter.c_err.size() << " of " << p.dump.n_concepts
              << " concepts from " << p.errs.size() << " mispredicted samples\n";
  });
}

int cmd_discover(const DiscoverArgs& args) {
  return run_command([&] {
    RunConfig config = load_run(args.config);
    if (args.variant) {
      if (*args.variant == "gmm")
        config.variant = SliceVariant::gmm;
      else if (*args.variant == "linear")
        config.variant = SliceVariant::linear;
      else
        throw ConfigError("--variant must be gmm or linear");
    }
    if (args.t_g)
      config.train.t_g = *args.t_g;
    if (args.no_gmm_loss)
      config.train.enable_gmm_loss = false;
    if (args.no_true_loss)
      config.train.enable_true_loss = false;
    if (args.no_pred_loss)
      config.train.enable_pred_loss = false;
    if (args.no_filter)
      config.no_filter = true;
    config.validate();
    config.train.seed = resolve_seed(args.seed, config.train.seed);

    const PreparedDump p = prepare(args.dump_dir);
    const ConceptFilter filter = build_filter(p, config, false);
    const SliceModel model = config.variant == SliceVariant::gmm
                                 ? fit_slices(p.dump, p.errs, filter, config.train)
                                 : fit_slices_linear(p.dump, p.errs, filter,
                                                     config.train);

    const ArtifactMeta meta{config_fingerprint(config), config.train.seed};
    write_model_json(args.out_dir / "model.json", model, meta);
    write_history_csv(args.out_dir / "history.csv", model.history);
    const EpochStats& last = model.history.back();
    std::cout << "fitted " << model.t_g() << " slices over " << model.k_err()
              << " concepts from " << p.errs.size() << " mispredicted samples"
              << " (final l_gmm " << last.l_gmm << ", acc_ctrue " << last.acc_true
              << ", acc_cpred " << last.acc_pred << ")\n";
  });
}

int cmd_explain(const ExplainArgs& args) {
  return run_command([&] {
    RunConfig config = load_run(args.config);
    if (args.t_k)
      config.t_k = *args.t_k;
    config.validate();
    const std::uint64_t seed = resolve_seed(args.seed, config.train.seed);

    const PreparedDump p = prepare(args.dump_dir);
    const SliceModel model = read_model_json(args.model_path);
    const SliceAssignment assign = build_assignment(model, p.dump, p.errs);
    const auto slices =
        explain_slices(model, p.dump, p.errs, assign, config.t_k, config.ecsa_eps,
                       config.ecsa_posterior, static_cast<std::size_t>(config.exemplars));
    write_slices_json(args.out_path, slices, config.t_k, config.ecsa_posterior,
                      {config_fingerprint(config), seed});
    std::cout << "explained " << slices.size() << " non-empty slices\n";
  });
}

int cmd_rank(const RankArgs& args) {
  return run_command([&] {
    RunConfig config = load_run(args.config);
    if (args.tau)
      config.tau = *args.tau;
    config.validate();
    const std::uint64_t seed = resolve_seed(args.seed, config.train.seed);

    const PreparedDump p = prepare(args.dump_dir);
    const SliceModel model = read_model_json(args.model_path);
    const auto scores = rank_slices(model, p.dump, p.errs, config.tau);
    write_ranking_json(args.out_path, scores, config.tau,
                       {config_fingerprint(config), seed});
    std::cout << "ranked " << scores.size() << " slices\n";
  });
}

int cmd_eval(const EvalArgs& args) {
  return run_command([&] {
    const RunConfig config = load_run(args.config);
    const std::uint64_t seed = resolve_seed(args.seed, config.train.seed);

    const PreparedDump p = prepare(args.dump_dir);
    const SliceModel model = read_model_json(args.model_path);
    const SliceAssignment assign = build_assignment(model, p.dump, p.errs);
    const MetricReport report = evaluate_discovery(assign, truth_over_errors(p));
    write_metrics_json(args.out_path, report, {config_fingerprint(config), seed});
    std::cout << "precision_at_10 " << report.precision_at_10 << ", mgf "
              << report.mgf << " over " << report.truth_ids.size()
              << " annotated slices\n";
  });
}

int cmd_sweep(const SweepArgs& args) {
  return run_command([&] {
    RunConfig config = load_run(args.config);
    config.train.seed = resolve_seed(args.seed, config.train.seed);
    const int t_max = args.t_g_max.value_or(config.train.t_g);
    if (args.t_g_min < 1 || t_max < args.t_g_min)
      throw ConfigError("sweep range must satisfy 1 <= min <= max");

    const PreparedDump p = prepare(args.dump_dir);
    const ConceptFilter filter = build_filter(p, config, false);

    // Evaluation is possible only with annotations on at least ten errors.
    bool can_eval = p.dump.has_slice_labels() && p.errs.size() >= 10;
    std::vector<int> truth;
    if (can_eval) {
      truth = truth_over_errors(p);
      can_eval = std::any_of(truth.begin(), truth.end(), [](int t) { return t >= 0; });
    }

    std::vector<SweepRow> rows;
    for (int t = args.t_g_min; t <= t_max; ++t) {
      RunConfig cfg = config;
      cfg.train.t_g = t;
      const SliceModel model =
          cfg.variant == SliceVariant::gmm
              ? fit_slices(p.dump, p.errs, filter, cfg.train)
              : fit_slices_linear(p.dump, p.errs, filter, cfg.train);
      SweepRow row;
      row.t_g = t;
      row.final_stats = model.history.back();
      if (can_eval) {
        const SliceAssignment assign = build_assignment(model, p.dump, p.errs);
        const MetricReport report = evaluate_discovery(assign, truth);
        row.p10 = report.precision_at_10;
        row.mgf = report.mgf;
      }
      rows.push_back(row);
    }
    write_sweep_csv(args.out_path, rows);
    std::cout << "swept t_g from " << args.t_g_min << " to " << t_max << " ("
              << rows.size() << " fits)\n";
  });
}

int cmd_report(const ReportArgs& args) {
  return run_command([&] {
    write_report_md(args.out_path, args.slices_path, args.ranking_path);
    std::cout << "wrote " << args.out_path.string() << "\n";
  });
}

}  // namespace cbslice

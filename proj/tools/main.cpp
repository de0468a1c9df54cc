#include <CLI11.hpp>

#include <optional>
#include <string>

#include "cbslice/commands.hpp"
#include "cbslice/version.hpp"

namespace {

// CLI11 stores into concrete fields; optionals are detected via ->count().
struct SeedOpt {
  std::uint64_t value = 0;
  CLI::Option* opt = nullptr;

  std::optional<std::uint64_t> get() const {
    if (opt && opt->count() > 0)
      return value;
    return std::nullopt;
  }
};

SeedOpt add_seed(CLI::App* cmd) {
  SeedOpt seed;
  seed.opt = cmd->add_option("--seed", seed.value,
                             "Override the run seed (flag > CBSLICE_SEED > config)");
  return seed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discover, explain and rank error slices of a concept-bottleneck "
               "model from its prediction dump"};
  app.set_version_flag("--version", std::string("cbslice ") + cbslice::kVersion);
  app.require_subcommand(1);

  int rc = 0;

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic prediction dump");
  cbslice::SynthArgs synth_args;
  synth->add_option("--config", synth_args.config, "Synth config (TOML)");
  synth->add_option("--out", synth_args.out_dir, "Output dump directory")->required();
  SeedOpt synth_seed = add_seed(synth);
  synth->callback([&] {
    synth_args.seed = synth_seed.get();
    rc = cbslice::cmd_synth(synth_args);
  });

  // filter
  auto* filter = app.add_subcommand("filter",
                                    "Score concepts and select the error-prone set");
  cbslice::FilterArgs filter_args;
  filter->add_option("--dump", filter_args.dump_dir, "Dump directory")->required();
  filter->add_option("--out", filter_args.out_path, "Output filter.json")->required();
  filter->add_option("--config", filter_args.config, "Run config (TOML)");
  SeedOpt filter_seed = add_seed(filter);
  filter->callback([&] {
    filter_args.seed = filter_seed.get();
    rc = cbslice::cmd_filter(filter_args);
  });

  // discover
  auto* discover = app.add_subcommand("discover", "Fit the slice model");
  cbslice::DiscoverArgs discover_args;
  std::string variant;
  int t_g = 0;
  discover->add_option("--dump", discover_args.dump_dir, "Dump directory")->required();
  discover->add_option("--out-dir", discover_args.out_dir,
                       "Directory for model.json and history.csv")->required();
  discover->add_option("--config", discover_args.config, "Run config (TOML)");
  auto* variant_opt =
      discover->add_option("--variant", variant, "Slicer variant: gmm or linear");
  auto* t_g_opt = discover->add_option("--t-g", t_g, "Number of slices");
  discover->add_flag("--no-filter", discover_args.no_filter,
                     "Slice over all concepts instead of the error-prone set");
  discover->add_flag("--no-gmm-loss", discover_args.no_gmm_loss,
                     "Drop the mixture likelihood term");
  discover->add_flag("--no-true-loss", discover_args.no_true_loss,
                     "Drop the true-concept auxiliary term");
  discover->add_flag("--no-pred-loss", discover_args.no_pred_loss,
                     "Drop the predicted-concept auxiliary term");
  SeedOpt discover_seed = add_seed(discover);
  discover->callback([&] {
    discover_args.seed = discover_seed.get();
    if (variant_opt->count() > 0)
      discover_args.variant = variant;
    if (t_g_opt->count() > 0)
      discover_args.t_g = t_g;
    rc = cbslice::cmd_discover(discover_args);
  });

  // explain
  auto* explain = app.add_subcommand("explain", "Extract keyword concepts per slice");
  cbslice::ExplainArgs explain_args;
  int t_k = 0;
  explain->add_option("--dump", explain_args.dump_dir, "Dump directory")->required();
  explain->add_option("--model", explain_args.model_path, "model.json")->required();
  explain->add_option("--out", explain_args.out_path, "Output slices.json")->required();
  explain->add_option("--config", explain_args.config, "Run config (TOML)");
  auto* t_k_opt = explain->add_option("--t-k", t_k, "Keywords per slice");
  SeedOpt explain_seed = add_seed(explain);
  explain->callback([&] {
    explain_args.seed = explain_seed.get();
    if (t_k_opt->count() > 0)
      explain_args.t_k = t_k;
    rc = cbslice::cmd_explain(explain_args);
  });

  // rank
  auto* rank = app.add_subcommand("rank", "Order slices by informativeness");
  cbslice::RankArgs rank_args;
  double tau = 0.0;
  rank->add_option("--dump", rank_args.dump_dir, "Dump directory")->required();
  rank->add_option("--model", rank_args.model_path, "model.json")->required();
  rank->add_option("--out", rank_args.out_path, "Output ranking.json")->required();
  rank->add_option("--config", rank_args.config, "Run config (TOML)");
  auto* tau_opt = rank->add_option("--tau", tau, "Effective-size saturation scale");
  SeedOpt rank_seed = add_seed(rank);
  rank->callback([&] {
    rank_args.seed = rank_seed.get();
    if (tau_opt->count() > 0)
      rank_args.tau = tau;
    rc = cbslice::cmd_rank(rank_args);
  });

  // eval
  auto* eval = app.add_subcommand("eval",
                                  "Score discovered slices against annotations");
  cbslice::EvalArgs eval_args;
  eval->add_option("--dump", eval_args.dump_dir, "Dump directory")->required();
  eval->add_option("--model", eval_args.model_path, "model.json")->required();
  eval->add_option("--out", eval_args.out_path, "Output metrics.json")->required();
  eval->add_option("--config", eval_args.config, "Run config (TOML)");
  SeedOpt eval_seed = add_seed(eval);
  eval->callback([&] {
    eval_args.seed = eval_seed.get();
    rc = cbslice::cmd_eval(eval_args);
  });

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Refit across a range of slice counts");
  cbslice::SweepArgs sweep_args;
  int t_g_max = 0;
  sweep->add_option("--dump", sweep_args.dump_dir, "Dump directory")->required();
  sweep->add_option("--out", sweep_args.out_path, "Output sweep.csv")->required();
  sweep->add_option("--config", sweep_args.config, "Run config (TOML)");
  sweep->add_option("--t-g-min", sweep_args.t_g_min, "Smallest slice count");
  auto* max_opt = sweep->add_option("--t-g-max", t_g_max,
                                    "Largest slice count (default: configured t_g)");
  SeedOpt sweep_seed = add_seed(sweep);
  sweep->callback([&] {
    sweep_args.seed = sweep_seed.get();
    if (max_opt->count() > 0)
      sweep_args.t_g_max = t_g_max;
    rc = cbslice::cmd_sweep(sweep_args);
  });

  // report
  auto* report = app.add_subcommand("report", "Render a markdown slice report");
  cbslice::ReportArgs report_args;
  report->add_option("--slices", report_args.slices_path, "slices.json")->required();
  report->add_option("--ranking", report_args.ranking_path, "ranking.json")->required();
  report->add_option("--out", report_args.out_path, "Output report.md")->required();
  report->callback([&] { rc = cbslice::cmd_report(report_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cbslice::kExitConfig;
  }
  return rc;
}

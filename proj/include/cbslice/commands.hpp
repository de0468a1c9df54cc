#ifndef CBSLICE_COMMANDS_HPP
#define CBSLICE_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

namespace cbslice {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitPrecondition = 4;

// Seed precedence: --seed flag, then the CBSLICE_SEED environment variable,
// then the config file value. A malformed environment value is a config
// error.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag,
                           std::uint64_t config_seed);

// Runs fn and maps thrown errors onto exit codes (messages go to stderr):
// ConfigError -> 2, IoError -> 3, PreconditionError and invalid_argument -> 4.
int run_command(const std::function<void()>& fn);

struct SynthArgs {
  std::filesystem::path config;  // empty = built-in defaults
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
};

struct FilterArgs {
  std::filesystem::path dump_dir;
  std::filesystem::path out_path;
  std::filesystem::path config;  // empty = defaults
  std::optional<std::uint64_t> seed;
};

struct DiscoverArgs {
  std::filesystem::path dump_dir;
  std::filesystem::path out_dir;  // receives model.json and history.csv
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;  // "gmm" | "linear"
  std::optional<int> t_g;
  bool no_filter = false;      // flags can only switch features off
  bool no_gmm_loss = false;
  bool no_true_loss = false;
  bool no_pred_loss = false;
};

struct ExplainArgs {
  std::filesystem::path dump_dir;
  std::filesystem::path model_path;
  std::filesystem::path out_path;
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<int> t_k;
};

struct RankArgs {
  std::filesystem::path dump_dir;
  std::filesystem::path model_path;
  std::filesystem::path out_path;
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<double> tau;
};

struct EvalArgs {
  std::filesystem::path dump_dir;
  std::filesystem::path model_path;
  std::filesystem::path out_path;
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
};

struct SweepArgs {
  std::filesystem::path dump_dir;
  std::filesystem::path out_path;
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  int t_g_min = 2;
  std::optional<int> t_g_max;  // defaults to the configured t_g
};

struct ReportArgs {
  std::filesystem::path slices_path;
  std::filesystem::path ranking_path;
  std::filesystem::path out_path;
};

int cmd_synth(const SynthArgs& args);
int cmd_filter(const FilterArgs& args);
int cmd_discover(const DiscoverArgs& args);
int cmd_explain(const ExplainArgs& args);
int cmd_rank(const RankArgs& args);
int cmd_eval(const EvalArgs& args);
int cmd_sweep(const SweepArgs& args);
int cmd_report(const ReportArgs& args);

}  // namespace cbslice

#endif

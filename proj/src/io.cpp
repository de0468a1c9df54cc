#include "cbslice/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cbslice/errors.hpp"
#include "cbslice/version.hpp"

static_assert(std::endian::native == std::endian::little,
              "dump files are little-endian; big-endian hosts are unsupported");
static_assert(sizeof(float) == 4 && sizeof(double) == 8);

namespace cbslice {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------- binary io

template <typename T>
void write_binary(const fs::path& path, const std::vector<T>& values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(T)));
  if (!out)
    throw IoError("write failed: " + path.string());
}

template <typename T>
std::vector<T> read_binary(const fs::path& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open: " + path.string());
  std::vector<T> values(count);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(count * sizeof(T)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(T))
    throw IoError("truncated file: " + path.string());
  char extra;
  in.read(&extra, 1);
  if (in.gcount() != 0)
    throw IoError("trailing bytes in: " + path.string());
  return values;
}

std::vector<float> to_f32(const std::vector<double>& v) {
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = static_cast<float>(v[i]);
  return out;
}

// ----------------------------------------------------------------- json io

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json matrix_rows(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c)
      row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_rows(const json& rows, const std::string& what) {
  if (!rows.is_array())
    throw IoError(what + ": expected an array of rows");
  const std::size_t n = rows.size();
  const std::size_t k = n == 0 ? 0 : rows.at(0).size();
  Matrix m(n, k);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = rows.at(r);
    if (!row.is_array() || row.size() != k)
      throw IoError(what + ": ragged rows");
    for (std::size_t c = 0; c < k; ++c)
      m(r, c) = row.at(c).get<double>();
  }
  return m;
}

json map_to_json(const LinearMap& map) {
  return {{"bias", map.bias}, {"weights", matrix_rows(map.weights)}};
}

LinearMap map_from_json(const json& j, const std::string& what) {
  LinearMap map;
  map.weights = matrix_from_rows(j.at("weights"), what + ".weights");
  map.bias = j.at("bias").get<std::vector<double>>();
  if (map.bias.size() != map.weights.rows())
    throw IoError(what + ": bias length does not match weights");
  return map;
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec)
      throw IoError("cannot create directory: " + path.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out)
    throw IoError("write failed: " + path.string());
}

void write_json_file(const fs::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw IoError("malformed json in " + path.string() + ": " + e.what());
  }
}

void stamp_meta(json& j, const ArtifactMeta& meta) {
  j["tool_version"] = kVersion;
  j["config_hash"] = meta.config_hash;
  j["seed"] = meta.seed;
}

// ------------------------------------------------------ flat toml handling

struct TomlValue {
  enum class Kind { integer, real, boolean, text };
  Kind kind;
  std::int64_t i = 0;
  double d = 0.0;
  bool b = false;
  std::string s;
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos)
    return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool valid_key(const std::string& key) {
  if (key.empty())
    return false;
  for (char c : key)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
      return false;
  return true;
}

TomlValue parse_toml_value(std::string raw, int line_no) {
  const std::string where = " (line " + std::to_string(line_no) + ")";
  TomlValue v;
  if (!raw.empty() && raw.front() == '"') {
    const auto close = raw.find('"', 1);
    if (close == std::string::npos)
      throw ConfigError("unterminated string" + where);
    const std::string rest = trim(raw.substr(close + 1));
    if (!rest.empty() && rest.front() != '#')
      throw ConfigError("trailing characters after string" + where);
    v.kind = TomlValue::Kind::text;
    v.s = raw.substr(1, close - 1);
    return v;
  }
  // Strip a trailing comment from an unquoted value.
  const auto hash = raw.find('#');
  if (hash != std::string::npos)
    raw = trim(raw.substr(0, hash));
  if (raw.empty())
    throw ConfigError("missing value" + where);
  if (raw == "true" || raw == "false") {
    v.kind = TomlValue::Kind::boolean;
    v.b = raw == "true";
    return v;
  }
  const char* first = raw.data();
  const char* last = raw.data() + raw.size();
  std::int64_t as_int = 0;
  auto ri = std::from_chars(first, last, as_int);
  if (ri.ec == std::errc() && ri.ptr == last) {
    v.kind = TomlValue::Kind::integer;
    v.i = as_int;
    return v;
  }
  double as_double = 0.0;
  auto rd = std::from_chars(first, last, as_double);
  if (rd.ec == std::errc() && rd.ptr == last) {
    v.kind = TomlValue::Kind::real;
    v.d = as_double;
    return v;
  }
  throw ConfigError("cannot parse value '" + raw + "'" + where);
}

// Flat `key = value` subset of TOML: comments, strings, booleans, integers
// and floats. Sections and arrays are rejected.
class TomlTable {
public:
  explicit TomlTable(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string t = trim(line);
      if (t.empty() || t.front() == '#')
        continue;
      if (t.front() == '[')
        throw ConfigError("sections are not supported (line " +
                          std::to_string(line_no) + ")");
      const auto eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError("expected key = value (line " + std::to_string(line_no) +
                          ")");
      const std::string key = trim(t.substr(0, eq));
      if (!valid_key(key))
        throw ConfigError("invalid key '" + key + "' (line " +
                          std::to_string(line_no) + ")");
      if (values_.count(key))
        throw ConfigError("duplicate key '" + key + "'");
      values_.emplace(key, parse_toml_value(trim(t.substr(eq + 1)), line_no));
    }
  }

  int get_int(const std::string& key, int fallback) {
    const TomlValue* v = take(key);
    if (!v)
      return fallback;
    if (v->kind != TomlValue::Kind::integer)
      throw ConfigError(key + " must be an integer");
    if (v->i < INT32_MIN || v->i > INT32_MAX)
      throw ConfigError(key + " is out of range");
    return static_cast<int>(v->i);
  }

  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) {
    const TomlValue* v = take(key);
    if (!v)
      return fallback;
    if (v->kind != TomlValue::Kind::integer || v->i < 0)
      throw ConfigError(key + " must be a non-negative integer");
    return static_cast<std::uint64_t>(v->i);
  }

  double get_double(const std::string& key, double fallback) {
    const TomlValue* v = take(key);
    if (!v)
      return fallback;
    if (v->kind == TomlValue::Kind::integer)
      return static_cast<double>(v->i);
    if (v->kind != TomlValue::Kind::real)
      throw ConfigError(key + " must be a number");
    return v->d;
  }

  bool get_bool(const std::string& key, bool fallback) {
    const TomlValue* v = take(key);
    if (!v)
      return fallback;
    if (v->kind != TomlValue::Kind::boolean)
      throw ConfigError(key + " must be true or false");
    return v->b;
  }

  std::string get_string(const std::string& key, const std::string& fallback) {
    const TomlValue* v = take(key);
    if (!v)
      return fallback;
    if (v->kind != TomlValue::Kind::text)
      throw ConfigError(key + " must be a quoted string");
    return v->s;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : values_)
      if (!used_.count(key))
        throw ConfigError("unknown config key '" + key + "'");
  }

private:
  const TomlValue* take(const std::string& key) {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
  }

  std::map<std::string, TomlValue> values_;
  std::set<std::string> used_;
};

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

// ------------------------------------------------------------ dump on disk

void write_dump(const EvalDump& dump, const fs::path& dir) {
  dump.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw IoError("cannot create directory: " + dir.string());

  json meta;
  meta["version"] = kDumpFormatVersion;
  meta["n_samples"] = dump.n_samples;
  meta["n_concepts"] = dump.n_concepts;
  meta["n_classes"] = dump.n_classes;
  meta["concept_names"] = dump.concept_names;
  meta["class_names"] = dump.class_names;
  meta["has_slice_labels"] = dump.has_slice_labels();
  write_json_file(dir / "meta.json", meta);

  write_binary(dir / "concept_logits.f32", to_f32(dump.concept_logits.data()));

  std::vector<std::uint8_t> truth(dump.concepts_true.size());
  for (std::size_t i = 0; i < truth.size(); ++i)
    truth[i] = dump.concepts_true.data()[i] == 1.0 ? 1 : 0;
  write_binary(dir / "concepts_true.u8", truth);

  std::vector<std::uint32_t> labels(dump.n_samples);
  for (std::size_t i = 0; i < labels.size(); ++i)
    labels[i] = static_cast<std::uint32_t>(dump.labels_true[i]);
  write_binary(dir / "labels_true.u32", labels);

  write_binary(dir / "predictor_weights.f32", to_f32(dump.predictor.weights.data()));
  write_binary(dir / "predictor_bias.f32", to_f32(dump.predictor.bias));

  if (dump.has_slice_labels()) {
    std::vector<std::int32_t> slices(dump.n_samples);
    for (std::size_t i = 0; i < slices.size(); ++i)
      slices[i] = dump.slice_labels[i];
    write_binary(dir / "slice_labels.i32", slices);
  }
}

EvalDump read_dump(const fs::path& dir) {
  const json meta = read_json_file(dir / "meta.json");
  EvalDump dump;
  try {
    if (meta.at("version").get<std::string>() != kDumpFormatVersion)
      throw IoError("unsupported dump version in " + dir.string());
    dump.n_samples = meta.at("n_samples").get<std::size_t>();
    dump.n_concepts = meta.at("n_concepts").get<std::size_t>();
    dump.n_classes = meta.at("n_classes").get<std::size_t>();
    dump.concept_names = meta.at("concept_names").get<std::vector<std::string>>();
    dump.class_names = meta.at("class_names").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw IoError("bad meta.json in " + dir.string() + ": " + e.what());
  }

  const std::size_t cells = dump.n_samples * dump.n_concepts;
  const auto logits = read_binary<float>(dir / "concept_logits.f32", cells);
  dump.concept_logits = Matrix(dump.n_samples, dump.n_concepts);
  for (std::size_t i = 0; i < cells; ++i)
    dump.concept_logits.data()[i] = logits[i];

  const auto truth = read_binary<std::uint8_t>(dir / "concepts_true.u8", cells);
  dump.concepts_true = Matrix(dump.n_samples, dump.n_concepts);
  for (std::size_t i = 0; i < cells; ++i)
    dump.concepts_true.data()[i] = truth[i];

  const auto labels = read_binary<std::uint32_t>(dir / "labels_true.u32", dump.n_samples);
  dump.labels_true.assign(labels.begin(), labels.end());

  const auto weights = read_binary<float>(dir / "predictor_weights.f32",
                                          dump.n_classes * dump.n_concepts);
  dump.predictor.weights = Matrix(dump.n_classes, dump.n_concepts);
  for (std::size_t i = 0; i < weights.size(); ++i)
    dump.predictor.weights.data()[i] = weights[i];
  const auto bias = read_binary<float>(dir / "predictor_bias.f32", dump.n_classes);
  dump.predictor.bias.assign(bias.begin(), bias.end());

  bool has_slices = false;
  if (meta.contains("has_slice_labels"))
    has_slices = meta["has_slice_labels"].get<bool>();
  if (has_slices) {
    const auto slices = read_binary<std::int32_t>(dir / "slice_labels.i32",
                                                  dump.n_samples);
    dump.slice_labels.assign(slices.begin(), slices.end());
  }

  try {
    dump.validate();
  } catch (const PreconditionError& e) {
    throw IoError("invalid dump in " + dir.string() + ": " + e.what());
  }
  return dump;
}

// ------------------------------------------------------------ run configs

void RunConfig::validate() const {
  train.validate();
  if (t_e < 1)
    throw ConfigError("t_e must be at least 1");
  if (t_k < 1)
    throw ConfigError("t_k must be at least 1");
  if (!(tau > 0.0))
    throw ConfigError("tau must be positive");
  if (!(logit_eps > 0.0 && logit_eps < 0.5))
    throw ConfigError("logit_eps must be in (0, 0.5)");
  if (!(ecsa_eps > 0.0 && ecsa_eps < 0.5))
    throw ConfigError("ecsa_eps must be in (0, 0.5)");
  if (exemplars < 0)
    throw ConfigError("exemplars must be non-negative");
}

RunConfig parse_run_config(const std::string& text) {
  TomlTable t(text);
  RunConfig c;
  c.train.seed = t.get_seed("seed", c.train.seed);
  c.train.t_g = t.get_int("t_g", c.train.t_g);
  c.train.lambda = t.get_double("lambda", c.train.lambda);
  c.train.epochs = t.get_int("epochs", c.train.epochs);
  c.train.lr = t.get_double("lr", c.train.lr);
  c.train.lr_decay_factor = t.get_double("lr_decay_factor", c.train.lr_decay_factor);
  c.train.lr_decay_every = t.get_int("lr_decay_every", c.train.lr_decay_every);
  c.train.batch_size = t.get_int("batch_size", c.train.batch_size);
  c.train.variance_floor = t.get_double("variance_floor", c.train.variance_floor);
  c.train.enable_gmm_loss = t.get_bool("enable_gmm_loss", c.train.enable_gmm_loss);
  c.train.enable_true_loss = t.get_bool("enable_true_loss", c.train.enable_true_loss);
  c.train.enable_pred_loss = t.get_bool("enable_pred_loss", c.train.enable_pred_loss);
  c.t_e = t.get_int("t_e", c.t_e);
  c.t_k = t.get_int("t_k", c.t_k);
  c.tau = t.get_double("tau", c.tau);
  c.logit_eps = t.get_double("logit_eps", c.logit_eps);
  c.ecsa_eps = t.get_double("ecsa_eps", c.ecsa_eps);
  c.exemplars = t.get_int("exemplars", c.exemplars);
  c.no_filter = t.get_bool("no_filter", c.no_filter);

  const std::string posterior = t.get_string("ecsa_posterior", "full");
  if (posterior == "full")
    c.ecsa_posterior = EcsaPosterior::full;
  else if (posterior == "marginal")
    c.ecsa_posterior = EcsaPosterior::marginal;
  else
    throw ConfigError("ecsa_posterior must be \"full\" or \"marginal\"");

  const std::string variant = t.get_string("variant", "gmm");
  if (variant == "gmm")
    c.variant = SliceVariant::gmm;
  else if (variant == "linear")
    c.variant = SliceVariant::linear;
  else
    throw ConfigError("variant must be \"gmm\" or \"linear\"");

  t.reject_unknown();
  c.validate();
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  return parse_run_config(read_text_file(path));
}

void SynthRunConfig::validate() const {
  if (preset != "mnist_sum" && preset != "two_pattern")
    throw ConfigError("preset must be \"mnist_sum\" or \"two_pattern\"");
  if (!(scale > 0.0))
    throw ConfigError("scale must be positive");
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0))
    throw ConfigError("flip_prob must be in [0, 1]");
  if (distractor_concepts < 0)
    throw ConfigError("distractor_concepts must be non-negative");
  if (!(noise_sd >= 0.0))
    throw ConfigError("noise_sd must be non-negative");
  if (!(margin > 0.0))
    throw ConfigError("margin must be positive");
  if (pattern_count < 1 || filler_count < 1)
    throw ConfigError("pattern_count and filler_count must be at least 1");
}

SynthRunConfig parse_synth_config(const std::string& text) {
  TomlTable t(text);
  SynthRunConfig c;
  c.preset = t.get_string("preset", c.preset);
  c.scale = t.get_double("scale", c.scale);
  c.flip_prob = t.get_double("flip_prob", c.flip_prob);
  c.corrupt_rare = t.get_bool("corrupt_rare", c.corrupt_rare);
  c.distractor_concepts = t.get_int("distractor_concepts", c.distractor_concepts);
  c.noise_sd = t.get_double("noise_sd", c.noise_sd);
  c.margin = t.get_double("margin", c.margin);
  c.pattern_count = t.get_int("pattern_count", c.pattern_count);
  c.filler_count = t.get_int("filler_count", c.filler_count);
  c.seed = t.get_seed("seed", c.seed);
  t.reject_unknown();
  c.validate();
  return c;
}

SynthRunConfig load_synth_config(const fs::path& path) {
  return parse_synth_config(read_text_file(path));
}

std::string config_fingerprint(const RunConfig& c) {
  std::string canon;
  const auto add = [&](const std::string& key, const std::string& value) {
    canon += key;
    canon += '=';
    canon += value;
    canon += '\n';
  };
  add("batch_size", std::to_string(c.train.batch_size));
  add("ecsa_eps", format_double(c.ecsa_eps));
  add("ecsa_posterior", c.ecsa_posterior == EcsaPosterior::full ? "full" : "marginal");
  add("enable_gmm_loss", c.train.enable_gmm_loss ? "true" : "false");
  add("enable_pred_loss", c.train.enable_pred_loss ? "true" : "false");
  add("enable_true_loss", c.train.enable_true_loss ? "true" : "false");
  add("epochs", std::to_string(c.train.epochs));
  add("exemplars", std::to_string(c.exemplars));
  add("lambda", format_double(c.train.lambda));
  add("logit_eps", format_double(c.logit_eps));
  add("lr", format_double(c.train.lr));
  add("lr_decay_every", std::to_string(c.train.lr_decay_every));
  add("lr_decay_factor", format_double(c.train.lr_decay_factor));
  add("no_filter", c.no_filter ? "true" : "false");
  add("t_e", std::to_string(c.t_e));
  add("t_g", std::to_string(c.train.t_g));
  add("t_k", std::to_string(c.t_k));
  add("tau", format_double(c.tau));
  add("variance_floor", format_double(c.train.variance_floor));
  add("variant", c.variant == SliceVariant::gmm ? "gmm" : "linear");

  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char byte : canon) {
    hash ^= byte;
    hash *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

// -------------------------------------------------------------- artifacts

void write_filter_json(const fs::path& path, const ConceptFilter& filter,
                       const ArtifactMeta& meta) {
  json j;
  stamp_meta(j, meta);
  j["t_e"] = filter.t_e;
  j["c_err"] = filter.c_err;
  j["ectp_scores"] = matrix_rows(filter.table.scores);
  j["class_has_errors"] = std::vector<bool>(filter.table.has_errors.begin(),
                                            filter.table.has_errors.end());
  j["per_class_top"] = filter.per_class_top;
  j["warnings"] = filter.warnings;
  write_json_file(path, j);
}

void write_model_json(const fs::path& path, const SliceModel& model,
                      const ArtifactMeta& meta) {
  json j;
  stamp_meta(j, meta);
  j["variant"] = model.params.variant == SliceVariant::gmm ? "gmm" : "linear";
  j["c_err"] = model.c_err;
  j["t_g"] = model.t_g();
  j["k_err"] = model.k_err();
  if (model.params.variant == SliceVariant::gmm) {
    j["gmm"] = {{"log_vars", matrix_rows(model.params.gmm.log_vars)},
                {"means", matrix_rows(model.params.gmm.means)},
                {"weight_logits", model.params.gmm.weight_logits}};
  } else {
    j["linear"] = map_to_json(model.params.slicer);
  }
  j["aux"] = {{"pred_head", map_to_json(model.params.aux.pred_head)},
              {"true_head", map_to_json(model.params.aux.true_head)}};
  const TrainConfig& t = model.config;
  j["train"] = {{"batch_size", t.batch_size},
                {"enable_gmm_loss", t.enable_gmm_loss},
                {"enable_pred_loss", t.enable_pred_loss},
                {"enable_true_loss", t.enable_true_loss},
                {"epochs", t.epochs},
                {"lambda", t.lambda},
                {"lr", t.lr},
                {"lr_decay_every", t.lr_decay_every},
                {"lr_decay_factor", t.lr_decay_factor},
                {"seed", t.seed},
                {"t_g", t.t_g},
                {"variance_floor", t.variance_floor}};
  write_json_file(path, j);
}

SliceModel read_model_json(const fs::path& path) {
  const json j = read_json_file(path);
  SliceModel model;
  try {
    const std::string variant = j.at("variant").get<std::string>();
    if (variant == "gmm")
      model.params.variant = SliceVariant::gmm;
    else if (variant == "linear")
      model.params.variant = SliceVariant::linear;
    else
      throw IoError("unknown variant in " + path.string());

    model.c_err = j.at("c_err").get<std::vector<std::size_t>>();
    if (model.params.variant == SliceVariant::gmm) {
      const json& g = j.at("gmm");
      model.params.gmm.means = matrix_from_rows(g.at("means"), "gmm.means");
      model.params.gmm.log_vars = matrix_from_rows(g.at("log_vars"), "gmm.log_vars");
      model.params.gmm.weight_logits =
          g.at("weight_logits").get<std::vector<double>>();
    } else {
      model.params.slicer = map_from_json(j.at("linear"), "linear");
    }
    model.params.aux.true_head = map_from_json(j.at("aux").at("true_head"),
                                               "aux.true_head");
    model.params.aux.pred_head = map_from_json(j.at("aux").at("pred_head"),
                                               "aux.pred_head");

    const json& t = j.at("train");
    model.config.batch_size = t.at("batch_size").get<int>();
    model.config.enable_gmm_loss = t.at("enable_gmm_loss").get<bool>();
    model.config.enable_pred_loss = t.at("enable_pred_loss").get<bool>();
    model.config.enable_true_loss = t.at("enable_true_loss").get<bool>();
    model.config.epochs = t.at("epochs").get<int>();
    model.config.lambda = t.at("lambda").get<double>();
    model.config.lr = t.at("lr").get<double>();
    model.config.lr_decay_every = t.at("lr_decay_every").get<int>();
    model.config.lr_decay_factor = t.at("lr_decay_factor").get<double>();
    model.config.seed = t.at("seed").get<std::uint64_t>();
    model.config.t_g = t.at("t_g").get<int>();
    model.config.variance_floor = t.at("variance_floor").get<double>();
  } catch (const json::exception& e) {
    throw IoError("bad model json in " + path.string() + ": " + e.what());
  }
  return model;
}

void write_history_csv(const fs::path& path, const std::vector<EpochStats>& history) {
  std::string text = "epoch,l_gmm,l_ctrue,l_cpred,acc_ctrue,acc_cpred,lr\n";
  for (std::size_t e = 0; e < history.size(); ++e) {
    const EpochStats& s = history[e];
    text += std::to_string(e);
    for (double v : {s.l_gmm, s.l_true, s.l_pred, s.acc_true, s.acc_pred, s.lr}) {
      text += ',';
      text += format_double(v);
    }
    text += '\n';
  }
  write_text_file(path, text);
}

void write_slices_json(const fs::path& path,
                       const std::vector<SliceExplanation>& slices, int t_k,
                       EcsaPosterior mode, const ArtifactMeta& meta) {
  json j;
  stamp_meta(j, meta);
  j["t_k"] = t_k;
  j["ecsa_posterior"] = mode == EcsaPosterior::full ? "full" : "marginal";
  json arr = json::array();
  for (const auto& s : slices) {
    json keywords = json::array();
    for (const auto& kw : s.keywords)
      keywords.push_back({{"concept_index", kw.concept_index},
                          {"correct", kw.correct},
                          {"mean_score", kw.mean_score},
                          {"name", kw.name},
                          {"predicted_present", kw.predicted_present}});
    arr.push_back({{"exemplars", s.exemplars},
                   {"keywords", std::move(keywords)},
                   {"slice_id", s.slice_id}});
  }
  j["slices"] = std::move(arr);
  write_json_file(path, j);
}

void write_ranking_json(const fs::path& path, const std::vector<SliceScore>& scores,
                        double tau, const ArtifactMeta& meta) {
  json j;
  stamp_meta(j, meta);
  j["tau"] = tau;
  json arr = json::array();
  for (const auto& s : scores)
    arr.push_back({{"mc", s.mc},
                   {"members", s.members},
                   {"n_eff", s.n_eff},
                   {"sc", s.sc},
                   {"si", s.si},
                   {"slice_id", s.slice_id}});
  j["scores"] = std::move(arr);
  write_json_file(path, j);
}

void write_metrics_json(const fs::path& path, const MetricReport& report,
                        const ArtifactMeta& meta) {
  json j;
  stamp_meta(j, meta);
  j["precision_at_10"] = report.precision_at_10;
  j["mgf"] = report.mgf;
  j["truth_ids"] = report.truth_ids;
  json matching = json::array();
  for (std::size_t i = 0; i < report.truth_ids.size(); ++i)
    matching.push_back({{"slice_id", report.matching[i]},
                        {"truth_id", report.truth_ids[i]}});
  j["matching"] = std::move(matching);
  j["per_pair_p10"] = matrix_rows(report.per_pair_p10);
  write_json_file(path, j);
}

void write_sweep_csv(const fs::path& path, const std::vector<SweepRow>& rows) {
  std::string text = "t_g,l_gmm,l_ctrue,l_cpred,acc_ctrue,acc_cpred,p10,mgf\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const SweepRow& r : rows) {
    text += std::to_string(r.t_g);
    const EpochStats& s = r.final_stats;
    for (double v : {s.l_gmm, s.l_true, s.l_pred, s.acc_true, s.acc_pred,
                     r.p10.value_or(nan), r.mgf.value_or(nan)}) {
      text += ',';
      text += format_double(v);
    }
    text += '\n';
  }
  write_text_file(path, text);
}

void write_report_md(const fs::path& path, const fs::path& slices_json,
                     const fs::path& ranking_json) {
  const json slices = read_json_file(slices_json);
  const json ranking = read_json_file(ranking_json);
  try {
    if (slices.at("config_hash") != ranking.at("config_hash"))
      throw PreconditionError(
          "slices and ranking artifacts come from different configurations");

    std::string md = "# Error slice report\n\n";
    md += "- tool version: " + slices.at("tool_version").get<std::string>() + "\n";
    md += "- config hash: " + slices.at("config_hash").get<std::string>() + "\n";
    md += "- seed: " + std::to_string(slices.at("seed").get<std::uint64_t>()) + "\n";
    md += "- tau: " + format_double(ranking.at("tau").get<double>()) + "\n";

    // Explanations keyed by slice id, emitted in ranking order.
    std::map<int, const json*> by_id;
    for (const auto& s : slices.at("slices"))
      by_id[s.at("slice_id").get<int>()] = &s;

    std::size_t rank = 0;
    for (const auto& score : ranking.at("scores")) {
      ++rank;
      const int id = score.at("slice_id").get<int>();
      md += "\n## Rank " + std::to_string(rank) + ": slice " + std::to_string(id) +
            "\n\n";
      if (score.at("members").get<std::size_t>() == 0) {
        md += "- no members\n";
        continue;
      }
      md += "- informativeness " + format_double(score.at("si").get<double>()) +
            ", coherence " + format_double(score.at("mc").get<double>()) +
            ", compactness " + format_double(score.at("sc").get<double>()) + "\n";
      md += "- members " + std::to_string(score.at("members").get<std::size_t>()) +
            ", effective size " + format_double(score.at("n_eff").get<double>()) +
            "\n";
      const auto it = by_id.find(id);
      if (it == by_id.end()) {
        md += "- no explanation available\n";
        continue;
      }
      md += "- keyword concepts:\n";
      for (const auto& kw : it->second->at("keywords")) {
        md += "  - `" + kw.at("name").get<std::string>() + "` ";
        md += kw.at("correct").get<bool>() ? "[correct]" : "[mispredicted]";
        md += kw.at("predicted_present").get<bool>() ? " predicted present"
                                                     : " predicted absent";
        md += " (score " + format_double(kw.at("mean_score").get<double>()) + ")\n";
      }
      md += "- exemplar samples:";
      for (const auto& ex : it->second->at("exemplars"))
        md += " " + std::to_string(ex.get<std::size_t>());
      md += "\n";
    }
    write_text_file(path, md);
  } catch (const json::exception& e) {
    throw IoError(std::string("bad artifact json: ") + e.what());
  }
}

}  // namespace cbslice

#include "rfm/harness/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "rfm/errors.hpp"

namespace rfm::harness {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const KeyValue& kv, const std::string& expected) {
  throw ConfigError("line " + std::to_string(kv.line) + ": '" + kv.key + "' expects " + expected + ", got '" +
                    kv.value + "'");
}

double to_double(const KeyValue& kv) {
  double v = 0.0;
  const char* b = kv.value.data();
  const char* e = b + kv.value.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) bad_value(kv, "a number");
  return v;
}

std::uint64_t to_uint(const KeyValue& kv) {
  std::uint64_t v = 0;
  const char* b = kv.value.data();
  const char* e = b + kv.value.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) bad_value(kv, "a nonnegative integer");
  return v;
}

bool to_bool(const KeyValue& kv) {
  if (kv.value == "true" || kv.value == "1") return true;
  if (kv.value == "false" || kv.value == "0") return false;
  bad_value(kv, "true or false");
}

template <class T, class F>
std::vector<T> to_list(const KeyValue& kv, F convert) {
  std::vector<T> out;
  std::stringstream ss(kv.value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(convert(KeyValue{kv.key, trim(item), kv.line}));
  if (out.empty()) bad_value(kv, "a comma-separated list");
  return out;
}

}  // namespace

std::vector<KeyValue> parse_key_values(const std::string& text) {
  std::vector<KeyValue> out;
  std::istringstream is(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno);
    KeyValue kv{trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)), lineno};
    if (kv.key.empty()) throw ParseError("empty key", lineno);
    out.push_back(std::move(kv));
  }
  return out;
}

bool apply_spec_key(SyntheticSpec& s, const KeyValue& kv) {
  const std::string& k = kv.key;
  if (k == "source_graphs") s.source_graphs = to_uint(kv);
  else if (k == "target_graphs") s.target_graphs = to_uint(kv);
  else if (k == "classes") s.classes = to_uint(kv);
  else if (k == "min_nodes") s.min_nodes = to_uint(kv);
  else if (k == "max_nodes") s.max_nodes = to_uint(kv);
  else if (k == "features") s.features = to_uint(kv);
  else if (k == "densities") s.densities = to_list<double>(kv, to_double);
  else if (k == "class_separation") s.class_separation = to_double(kv);
  else if (k == "feature_sigma") s.feature_sigma = to_double(kv);
  else if (k == "feature_scale") s.feature_scale = to_double(kv);
  else if (k == "edge_multiplier") s.edge_multiplier = to_double(kv);
  else if (k == "feature_shift") s.feature_shift = to_double(kv);
  else if (k == "seed") s.seed = to_uint(kv);
  else return false;
  return true;
}

SyntheticSpec parse_synthetic_spec(const std::string& text) {
  SyntheticSpec s;
  for (const KeyValue& kv : parse_key_values(text))
    if (!apply_spec_key(s, kv)) throw ConfigError("line " + std::to_string(kv.line) + ": unknown key '" + kv.key + "'");
  validate(s);
  return s;
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) { return parse_synthetic_spec(read_text_file(path)); }

void validate(const SyntheticSpec& s) {
  if (s.classes < 2) throw InvalidSpec("need at least 2 classes");
  if (s.densities.size() != s.classes) throw InvalidSpec("need one density per class");
  for (double p : s.densities) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidSpec("densities must lie in (0, 1)");
    if (!(p * s.edge_multiplier > 0.0 && p * s.edge_multiplier < 1.0))
      throw InvalidSpec("shifted densities must lie in (0, 1)");
  }
  if (s.min_nodes == 0 || s.min_nodes > s.max_nodes) throw InvalidSpec("need 0 < min_nodes <= max_nodes");
  if (s.features == 0) throw InvalidSpec("need at least one feature");
  if (!(s.feature_sigma > 0.0) || !(s.feature_scale > 0.0)) throw InvalidSpec("feature sigma and scale must be positive");
  if (s.source_graphs == 0 || s.target_graphs == 0) throw InvalidSpec("graph counts must be positive");
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  RunConfig c;
  for (const KeyValue& kv : parse_key_values(text)) {
    const std::string& k = kv.key;
    if (k.rfind("synth.", 0) == 0) {
      KeyValue inner{k.substr(6), kv.value, kv.line};
      if (!apply_spec_key(c.synthetic, inner))
        throw ConfigError("line " + std::to_string(kv.line) + ": unknown key '" + k + "'");
      continue;
    }
    if (k == "curvature") c.curvature = to_double(kv);
    else if (k == "dim") c.dim = to_uint(kv);
    else if (k == "layers") c.layers = to_uint(kv);
    else if (k == "field_hidden") c.field_hidden = to_list<std::size_t>(kv, to_uint);
    else if (k == "lambda_rad") c.lambda_rad = to_double(kv);
    else if (k == "lambda_ang") c.lambda_ang = to_double(kv);
    else if (k == "lambda_fm") c.lambda_fm = to_double(kv);
    else if (k == "zeta") c.zeta = to_double(kv);
    else if (k == "temperature") c.temperature = to_double(kv);
    else if (k == "lr") c.lr = to_double(kv);
    else if (k == "weight_decay") c.weight_decay = to_double(kv);
    else if (k == "batch") c.batch = to_uint(kv);
    else if (k == "epochs") c.epochs = to_uint(kv);
    else if (k == "seed") c.seed = to_uint(kv);
    else if (k == "fm_detach_embeddings") c.fm_detach_embeddings = to_bool(kv);
    else if (k == "source_path") c.source_path = base_dir / kv.value;
    else if (k == "target_path") c.target_path = base_dir / kv.value;
    else throw ConfigError("line " + std::to_string(kv.line) + ": unknown key '" + k + "'");
  }
  if (c.dim == 0 || c.layers == 0 || c.batch == 0) throw ConfigError("dim, layers and batch must be positive");
  if (c.lambda_rad < 0 || c.lambda_ang < 0 || c.lambda_fm < 0) throw ConfigError("loss weights must be nonnegative");
  if (!(c.temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (c.source_path.empty() != c.target_path.empty())
    throw ConfigError("source_path and target_path must be given together");
  validate(c.synthetic);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text_file(path), path.parent_path());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace rfm::harness

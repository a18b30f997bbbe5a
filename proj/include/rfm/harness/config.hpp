#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rfm::harness {

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// `key = value` lines; `#` starts a comment; blank lines are skipped.
/// Throws ParseError on a line without '='.
std::vector<KeyValue> parse_key_values(const std::string& text);

struct SyntheticSpec {
  std::size_t source_graphs = 400;
  std::size_t target_graphs = 400;
  std::size_t classes = 2;
  std::size_t min_nodes = 12;
  std::size_t max_nodes = 20;
  std::size_t features = 4;
  /// Edge probability per class.
  std::vector<double> densities{0.15, 0.3};
  /// Class mean offset on the first feature, in units of feature_sigma.
  double class_separation = 1.0;
  double feature_sigma = 1.0;
  double feature_scale = 0.3;
  /// Target edge probability = source density * multiplier.
  double edge_multiplier = 1.5;
  /// Added to every target feature mean, in units of feature_sigma.
  double feature_shift = 0.5;
  std::uint64_t seed = 7;
};

/// Sets one spec field by name (e.g. "edge_multiplier"). Returns false for
/// unknown keys; throws ConfigError on bad values.
bool apply_spec_key(SyntheticSpec& spec, const KeyValue& kv);
SyntheticSpec parse_synthetic_spec(const std::string& text);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);
/// Throws InvalidSpec.
void validate(const SyntheticSpec& spec);

struct RunConfig {
  double curvature = -1.0;
  std::size_t dim = 16;
  std::size_t layers = 3;
  std::vector<std::size_t> field_hidden{128, 128, 128};
  double lambda_rad = 0.1;
  double lambda_ang = 0.1;
  double lambda_fm = 0.1;
  double zeta = 0.7;
  double temperature = 10.0;
  double lr = 1e-4;
  double weight_decay = 1e-12;
  std::size_t batch = 32;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  bool fm_detach_embeddings = false;
  std::filesystem::path source_path;
  std::filesystem::path target_path;
  SyntheticSpec synthetic;
};

/// Keys are the RunConfig field names; `synth.<key>` sets a SyntheticSpec
/// field. Relative data paths resolve against `base_dir`. Unknown keys and
/// malformed values throw ConfigError.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace rfm::harness

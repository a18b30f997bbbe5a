#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rfm/autodiff/nn.hpp"
#include "rfm/encoder.hpp"
#include "rfm/harness/config.hpp"
#include "rfm/losses.hpp"

namespace rfm::harness {

struct Model {
  GraphEncoder encoder;
  ad::Classifier classifier;
  ad::VectorField field;

  Model() = default;
  Model(std::size_t in_features, std::size_t classes, const RunConfig& cfg);

  std::vector<ad::Parameter*> parameters();
};

struct MetricsRow {
  std::size_t epoch = 0;
  LossBreakdown loss;
  double source_acc = 0.0;
  double target_acc = 0.0;
  double gated_fraction = 0.0;
  double grad_norm = 0.0;
};

std::string metrics_header();
std::string format_metrics_row(const MetricsRow& row);
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);

struct TrainResult {
  Model model;
  std::vector<MetricsRow> metrics;
};

/// Joint optimization of task + l1 RAD + l2 ANG + l3 FM. With `out_dir`,
/// writes metrics.csv and checkpoint.bin there after every epoch. Numerical
/// failures propagate after the last completed epoch has been saved.
TrainResult train(const RunConfig& cfg, const std::vector<GraphInstance>& source,
                  const std::vector<GraphInstance>& target,
                  const std::optional<std::filesystem::path>& out_dir = std::nullopt);

/// Loads data named by the config, or generates the synthetic pair.
std::pair<std::vector<GraphInstance>, std::vector<GraphInstance>> load_domains(const RunConfig& cfg);

/// Tangent embeddings Log_0(z), one row per graph.
Matrix embed_tangents(GraphEncoder& encoder, const std::vector<GraphInstance>& graphs);

/// Argmax of W v + b per graph.
std::vector<std::size_t> predict(Model& model, const std::vector<GraphInstance>& graphs);

/// Fraction of labeled graphs predicted correctly. Throws EmptyBatch for an
/// empty set, LabelOutOfRange if a graph has no label, DimensionMismatch if the
/// feature width differs from the encoder.
double evaluate(Model& model, const std::vector<GraphInstance>& graphs);

void save_model(const std::filesystem::path& path, const Model& model, std::size_t classes);
Model load_model(const std::filesystem::path& path);

}  // namespace rfm::harness

#include "rfm/harness/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "rfm/errors.hpp"
#include "rfm/flow.hpp"
#include "rfm/harness/data.hpp"

namespace rfm::harness {

Model::Model(std::size_t in_features, std::size_t classes, const RunConfig& cfg)
    : encoder(in_features, cfg.dim, cfg.layers, Curvature(cfg.curvature), cfg.seed),
      classifier(classes, cfg.dim, cfg.seed),
      field(cfg.dim, cfg.field_hidden, cfg.seed) {}

std::vector<ad::Parameter*> Model::parameters() {
  std::vector<ad::Parameter*> out = encoder.parameters();
  for (ad::Parameter* p : classifier.parameters()) out.push_back(p);
  for (ad::Parameter* p : field.parameters()) out.push_back(p);
  return out;
}

std::string metrics_header() {
  return "epoch,task,rad,ang,fm,total,source_acc,target_acc,gated_fraction,grad_norm";
}

std::string format_metrics_row(const MetricsRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%zu,%.8f,%.8f,%.8f,%.8f,%.8f,%.6f,%.6f,%.6f,%.8f", r.epoch, r.loss.task, r.loss.rad,
                r.loss.ang, r.loss.fm, r.loss.total, r.source_acc, r.target_acc, r.gated_fraction, r.grad_norm);
  return buf;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string());
  os << metrics_header() << '\n';
  for (const auto& r : rows) os << format_metrics_row(r) << '\n';
}

Matrix embed_tangents(GraphEncoder& encoder, const std::vector<GraphInstance>& graphs) {
  constexpr std::size_t kChunk = 128;
  Matrix out(graphs.size(), encoder.dim());
  for (std::size_t start = 0; start < graphs.size(); start += kChunk) {
    const std::size_t end = std::min(graphs.size(), start + kChunk);
    std::vector<const GraphInstance*> batch;
    for (std::size_t i = start; i < end; ++i) batch.push_back(&graphs[i]);
    ad::Tape tape;
    const Matrix& v = encoder.encode_batch(tape, batch).v.value();
    for (std::size_t i = start; i < end; ++i)
      for (std::size_t k = 0; k < encoder.dim(); ++k) out(i, k) = v(i - start, k);
  }
  return out;
}

namespace {

std::vector<std::size_t> argmax_logits(const ad::Classifier& clf, const Matrix& v) {
  const Matrix& W = clf.weight_value();
  const Matrix& b = clf.bias_value();
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.rows(); ++i) {
    std::size_t best = 0;
    double best_logit = -INFINITY;
    for (std::size_t k = 0; k < W.rows(); ++k) {
      const double l = dot(W.row_span(k), v.row_span(i)) + b(0, k);
      if (l > best_logit) {
        best_logit = l;
        best = k;
      }
    }
    out.push_back(best);
  }
  return out;
}

double accuracy(const std::vector<std::size_t>& pred, const std::vector<GraphInstance>& graphs) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < graphs.size(); ++i) hit += pred[i] == *graphs[i].label;
  return static_cast<double>(hit) / static_cast<double>(graphs.size());
}

}  // namespace

std::vector<std::size_t> predict(Model& model, const std::vector<GraphInstance>& graphs) {
  for (const auto& g : graphs)
    if (g.feature_dim() != model.encoder.in_features())
      throw DimensionMismatch("graph features have width " + std::to_string(g.feature_dim()) + ", model expects " +
                              std::to_string(model.encoder.in_features()));
  return argmax_logits(model.classifier, embed_tangents(model.encoder, graphs));
}

double evaluate(Model& model, const std::vector<GraphInstance>& graphs) {
  if (graphs.empty()) throw EmptyBatch("cannot evaluate on an empty dataset");
  for (const auto& g : graphs)
    if (!g.label) throw LabelOutOfRange("evaluation needs labeled graphs");
  return accuracy(predict(model, graphs), graphs);
}

void save_model(const std::filesystem::path& path, const Model& model, std::size_t classes) {
  const GraphEncoder& enc = model.encoder;
  ad::Parameter curv("meta.curvature", Matrix(1, 1, enc.curvature().value()));
  ad::Parameter shape("meta.encoder", Matrix(1, 4,
                                             Vec{static_cast<double>(enc.in_features()), static_cast<double>(enc.dim()),
                                                 static_cast<double>(enc.layers()), static_cast<double>(classes)}));
  Vec hidden;
  for (std::size_t h : model.field.hidden()) hidden.push_back(static_cast<double>(h));
  ad::Parameter fh("meta.field_hidden", Matrix(1, hidden.size(), hidden));
  std::vector<const ad::Parameter*> tensors{&curv, &shape, &fh};
  for (const ad::Parameter* p : enc.parameters()) tensors.push_back(p);
  tensors.push_back(&model.classifier.weight_param());
  tensors.push_back(&model.classifier.bias_param());
  for (const ad::Parameter* p : model.field.parameters()) tensors.push_back(p);
  const std::filesystem::path tmp = path.string() + ".tmp";
  ad::save_checkpoint(tmp, tensors);
  std::filesystem::rename(tmp, path);
}

Model load_model(const std::filesystem::path& path) {
  const auto tensors = ad::load_checkpoint(path);
  auto find = [&](const std::string& name) -> const Matrix& {
    for (const auto& t : tensors)
      if (t.name == name) return t.value;
    throw ParseError("checkpoint lacks tensor " + name, 0);
  };
  const Matrix& shape = find("meta.encoder");
  if (shape.size() != 4) throw ParseError("malformed meta.encoder", 0);
  RunConfig cfg;
  cfg.curvature = find("meta.curvature")[0];
  cfg.dim = static_cast<std::size_t>(shape[1]);
  cfg.layers = static_cast<std::size_t>(shape[2]);
  cfg.field_hidden.clear();
  for (double h : find("meta.field_hidden").data()) cfg.field_hidden.push_back(static_cast<std::size_t>(h));
  Model m(static_cast<std::size_t>(shape[0]), static_cast<std::size_t>(shape[3]), cfg);
  for (ad::Parameter* p : m.parameters()) {
    const Matrix& v = find(p->name);
    if (!v.same_shape(p->value)) throw ParseError("tensor " + p->name + " has the wrong shape", 0);
    p->value = v;
  }
  return m;
}

std::pair<std::vector<GraphInstance>, std::vector<GraphInstance>> load_domains(const RunConfig& cfg) {
  if (!cfg.source_path.empty()) return {load_graph_file(cfg.source_path), load_graph_file(cfg.target_path)};
  DomainPair d = generate_synthetic_shift(cfg.synthetic);
  return {std::move(d.source), std::move(d.target)};
}

namespace {

AngularGateReport subset(const AngularGateReport& all, const std::vector<std::size_t>& idx) {
  AngularGateReport r;
  for (std::size_t i : idx) {
    r.confidence.push_back(all.confidence[i]);
    r.mask.push_back(all.mask[i]);
    r.weight.push_back(all.weight[i]);
    r.pseudo_label.push_back(all.pseudo_label[i]);
    if (all.mask[i]) r.effective_count += all.weight[i];
  }
  return r;
}

std::vector<ManifoldPoint> rows_as_points(const Matrix& z, Curvature c) {
  std::vector<ManifoldPoint> out;
  out.reserve(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) out.emplace_back(z.row_vec(i), c);
  return out;
}

}  // namespace

TrainResult train(const RunConfig& cfg, const std::vector<GraphInstance>& source,
                  const std::vector<GraphInstance>& target, const std::optional<std::filesystem::path>& out_dir) {
  if (source.empty() || target.empty()) throw EmptyBatch("training needs source and target graphs");
  const std::size_t F = source.front().feature_dim();
  std::size_t classes = 2;
  for (const auto& g : source) {
    if (!g.label) throw LabelOutOfRange("every source graph needs a label");
    classes = std::max(classes, *g.label + 1);
    if (g.feature_dim() != F) throw DimensionMismatch("source graphs differ in feature width");
  }
  for (const auto& g : target) {
    if (g.feature_dim() != F) throw DimensionMismatch("target feature width differs from source");
    if (g.label) classes = std::max(classes, *g.label + 1);
  }

  const Curvature c(cfg.curvature);
  TrainResult res{Model(F, classes, cfg), {}};
  Model& model = res.model;
  ad::Adam opt(model.parameters(), {cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
  std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ULL + 1);
  std::mt19937_64 time_rng(cfg.seed * 0x9E3779B97F4A7C15ULL + 2);
  std::uniform_int_distribution<std::size_t> pick_s(0, source.size() - 1), pick_t(0, target.size() - 1);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const std::size_t B = cfg.batch;
  const std::size_t steps = (source.size() + B - 1) / B;
  const bool has_target_labels =
      std::all_of(target.begin(), target.end(), [](const GraphInstance& g) { return g.label.has_value(); });
  if (out_dir) std::filesystem::create_directories(*out_dir);

  Matrix target_tangents = embed_tangents(model.encoder, target);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const AngularGateReport gate_all = angular_gate(model.classifier, target_tangents, cfg.zeta);
    double s_task = 0, s_rad = 0, s_ang = 0, s_fm = 0, s_gn = 0;

    for (std::size_t step = 0; step < steps; ++step) {
      std::vector<std::size_t> is(B), it(B), labels(B);
      std::vector<const GraphInstance*> gs(B), gt(B);
      for (std::size_t b = 0; b < B; ++b) {
        is[b] = pick_s(rng);
        it[b] = pick_t(rng);
        gs[b] = &source[is[b]];
        gt[b] = &target[it[b]];
        labels[b] = *source[is[b]].label;
      }
      const AngularGateReport gate = subset(gate_all, it);

      ad::Tape tape;
      const auto es = model.encoder.encode_batch(tape, gs);
      const auto et = model.encoder.encode_batch(tape, gt);
      ad::Var task = task_loss(tape, model.classifier, es.v, labels);
      ad::Var total = task;
      s_task += task.item();

      if (cfg.lambda_rad > 0.0) {
        ad::Var rad = radial_wasserstein(ad::l2_norm(es.v), ad::l2_norm(et.v));
        total = ad::add(total, ad::scale(rad, cfg.lambda_rad));
        s_rad += rad.item();
      }
      if (cfg.lambda_ang > 0.0) {
        ad::Var ang = angular_loss(tape, model.classifier, et.v, gate, cfg.temperature, kAngularEps);
        total = ad::add(total, ad::scale(ang, cfg.lambda_ang));
        s_ang += ang.item();
      }
      if (cfg.lambda_fm > 0.0) {
        const CouplingPlan plan = couple(rows_as_points(es.z.value(), c), labels, rows_as_points(et.z.value(), c),
                                         gate.pseudo_label, gate.mask);
        std::vector<std::size_t> src_idx, tgt_idx;
        for (auto [a, b] : plan.pairs) {
          src_idx.push_back(a);
          tgt_idx.push_back(b);
        }
        ad::Var zs = ad::gather_rows(es.z, src_idx);
        ad::Var zt = ad::gather_rows(et.z, tgt_idx);
        if (cfg.fm_detach_embeddings) {
          zs = tape.constant(zs.value());
          zt = tape.constant(zt.value());
        }
        Matrix t(src_idx.size(), 1);
        for (double& x : t.data()) x = u01(time_rng);
        ad::Var fm = fm_loss(tape, model.field, zs, zt, tape.constant(std::move(t)), c);
        total = ad::add(total, ad::scale(fm, cfg.lambda_fm));
        s_fm += fm.item();
      }

      opt.zero_grad();
      tape.backward(total);
      s_gn += opt.grad_norm();
      opt.step();
    }

    const double n = static_cast<double>(steps);
    MetricsRow row;
    row.epoch = epoch;
    row.loss = total_loss(s_task / n, s_rad / n, s_ang / n, s_fm / n, {cfg.lambda_rad, cfg.lambda_ang, cfg.lambda_fm});
    row.source_acc = evaluate(model, source);
    target_tangents = embed_tangents(model.encoder, target);
    row.target_acc = has_target_labels ? accuracy(argmax_logits(model.classifier, target_tangents), target) : 0.0;
    row.gated_fraction = static_cast<double>(gate_all.gated()) / static_cast<double>(target.size());
    row.grad_norm = s_gn / n;
    res.metrics.push_back(row);
    if (out_dir) {
      write_metrics_csv(*out_dir / "metrics.csv", res.metrics);
      save_model(*out_dir / "checkpoint.bin", model, classes);
    }
  }
  return res;
}

}  // namespace rfm::harness

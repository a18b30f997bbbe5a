#include "rfm/autodiff/nn.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

namespace rfm::ad {

Matrix uniform_init(std::size_t rows, std::size_t cols, std::size_t fan_in, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (double& x : m.data()) x = dist(rng);
  return m;
}

// ---- VectorField ------------------------------------------------------------

VectorField::VectorField(std::size_t dim, std::vector<std::size_t> hidden, std::uint64_t seed)
    : dim_(dim), hidden_(std::move(hidden)) {
  std::size_t in = dim_ + 1;
  std::vector<std::size_t> widths = hidden_;
  widths.push_back(dim_);
  std::uint64_t s = seed;
  for (std::size_t l = 0; l < widths.size(); ++l) {
    const std::size_t out = widths[l];
    weights_.emplace_back("field.w" + std::to_string(l), uniform_init(in, out, in, s * 2654435761ULL + 2 * l + 1));
    biases_.emplace_back("field.b" + std::to_string(l), uniform_init(1, out, in, s * 2654435761ULL + 2 * l + 2));
    in = out;
  }
}

VectorField VectorField::zeros(std::size_t dim, std::vector<std::size_t> hidden) {
  VectorField f(dim, std::move(hidden), 0);
  for (auto& p : f.weights_) p.value = Matrix(p.value.rows(), p.value.cols());
  for (auto& p : f.biases_) p.value = Matrix(p.value.rows(), p.value.cols());
  return f;
}

Var VectorField::forward(Tape& tape, Var z, Var t) {
  if (z.cols() != dim_) throw ShapeMismatch("vector field input width differs from its dimension");
  if (t.cols() != 1 || t.rows() != z.rows()) throw ShapeMismatch("time must be a B x 1 column");
  Var h = concat(z, t);
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    h = add(matmul(h, tape.parameter(weights_[l])), tape.parameter(biases_[l]));
    if (l + 1 < weights_.size()) h = tanh_act(h);
  }
  return h;
}

std::vector<Parameter*> VectorField::parameters() {
  std::vector<Parameter*> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

std::vector<const Parameter*> VectorField::parameters() const {
  std::vector<const Parameter*> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

TangentVector vector_field_eval(VectorField& field, const ManifoldPoint& z, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainViolation("vector field time outside [0, 1]");
  if (z.dim() != field.dim()) throw DimensionMismatch("point dimension differs from the field");
  Tape tape;
  Var out = field.forward(tape, tape.constant(Matrix::row(z.coords())), tape.constant(Matrix(1, 1, t)));
  return {z, out.value().row_vec(0)};
}

// ---- Classifier -------------------------------------------------------------

Classifier::Classifier(std::size_t classes, std::size_t dim, std::uint64_t seed)
    : weight_("classifier.w", uniform_init(classes, dim, dim, seed * 7919ULL + 11)),
      bias_("classifier.b", uniform_init(1, classes, dim, seed * 7919ULL + 13)) {}

Var Classifier::logits(Tape& tape, Var v) {
  return add(matmul(v, transpose(tape.parameter(weight_))), tape.parameter(bias_));
}

// ---- Adam -------------------------------------------------------------------

Adam::Adam(std::vector<Parameter*> params, AdamConfig config) : params_(std::move(params)), config_(config) {
  for (Parameter* p : params_) {
    m_.emplace_back(p->value.rows(), p->value.cols());
    v_.emplace_back(p->value.rows(), p->value.cols());
  }
}

void Adam::zero_grad() {
  for (Parameter* p : params_) p->zero_grad();
}

double Adam::grad_norm() const {
  double s = 0.0;
  for (const Parameter* p : params_)
    for (double g : p->grad.data()) s += g * g;
  return std::sqrt(s);
}

void Adam::step() {
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter& p = *params_[k];
    if (!p.grad.same_shape(p.value)) throw ShapeMismatch("gradient shape differs for " + p.name);
    auto& w = p.value.data();
    const auto& g = p.grad.data();
    auto& m = m_[k].data();
    auto& v = v_[k].data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i] + config_.weight_decay * w[i];
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      w[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
  }
}

// ---- checkpoints ------------------------------------------------------------

namespace {

constexpr const char* kMagic = "rfm-checkpoint 1";

void write_le(std::ostream& os, double x) {
  auto bits = std::bit_cast<std::uint64_t>(x);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
  os.write(reinterpret_cast<const char*>(bytes), 8);
}

double read_le(std::istream& is) {
  unsigned char bytes[8];
  if (!is.read(reinterpret_cast<char*>(bytes), 8)) throw ParseError("checkpoint data truncated", 0);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const std::vector<const Parameter*>& tensors) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open checkpoint for writing: " + path.string());
  os << kMagic << '\n';
  for (const Parameter* p : tensors) {
    if (p->name.empty() || p->name.find_first_of(" \t\n") != std::string::npos)
      throw Error("checkpoint tensor names must be non-empty and whitespace-free");
    os << "tensor " << p->name << ' ' << p->value.rows() << ' ' << p->value.cols() << '\n';
  }
  os << "data\n";
  for (const Parameter* p : tensors)
    for (double x : p->value.data()) write_le(os, x);
  if (!os) throw Error("failed writing checkpoint " + path.string());
}

std::vector<Parameter> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open checkpoint " + path.string());
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(is, line) || line != kMagic) throw ParseError("missing checkpoint magic", lineno);
  std::vector<Parameter> out;
  while (std::getline(is, line)) {
    ++lineno;
    if (line == "data") break;
    std::istringstream ls(line);
    std::string kw, name;
    std::size_t r = 0, c = 0;
    if (!(ls >> kw >> name >> r >> c) || kw != "tensor") throw ParseError("bad tensor header line", lineno);
    out.emplace_back(name, Matrix(r, c));
  }
  if (line != "data") throw ParseError("missing data marker", lineno);
  for (Parameter& p : out)
    for (double& x : p.value.data()) x = read_le(is);
  return out;
}

}  // namespace rfm::ad

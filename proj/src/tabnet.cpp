#include "contab/tabnet.hpp"

#include <cmath>

#include "contab/error.hpp"

namespace contab {
namespace {

constexpr double kResidualScale = 0.70710678118654752440;  // sqrt(0.5)

Matrix glorot_uniform(int in, int out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  Matrix w(in, out);
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-limit, limit);
  }
  return w;
}

GluBlock make_glu_block(const std::string& name, int in, int out, double momentum, Rng& rng) {
  return GluBlock{Linear(name + ".fc", in, 2 * out, false, rng), BatchNorm(name + ".bn", 2 * out, momentum)};
}

Var apply(Tape& tape, GluBlock& block, Var x, Mode mode) {
  return glu(batch_norm(tape, block.fc(tape, x), block.bn, mode));
}

}  // namespace

void TabNetConfig::validate() const {
  if (input_dim <= 0 || n_steps <= 0 || n_d <= 0 || n_a <= 0 || latent_dim <= 0 || projection_dim <= 0) {
    throw InputError("TabNetConfig: all dimensions must be positive");
  }
  if (n_shared < 0 || n_independent < 0 || n_shared + n_independent == 0) {
    throw InputError("TabNetConfig: need at least one GLU layer");
  }
  if (latent_dim != n_d) throw InputError("TabNetConfig: latent_dim must equal n_d");
  if (!(gamma >= 1.0)) throw InputError("TabNetConfig: gamma must be >= 1");
  if (!(bn_momentum >= 0.0 && bn_momentum < 1.0)) throw InputError("TabNetConfig: bn_momentum must lie in [0, 1)");
}

nlohmann::json to_json(const TabNetConfig& c) {
  return {{"input_dim", c.input_dim},   {"n_steps", c.n_steps},       {"n_d", c.n_d},
          {"n_a", c.n_a},               {"gamma", c.gamma},           {"n_shared", c.n_shared},
          {"n_independent", c.n_independent}, {"latent_dim", c.latent_dim}, {"projection_dim", c.projection_dim},
          {"bn_momentum", c.bn_momentum}};
}

TabNetConfig tabnet_config_from_json(const nlohmann::json& doc, TabNetConfig c) {
  c.input_dim = doc.value("input_dim", c.input_dim);
  c.n_steps = doc.value("n_steps", c.n_steps);
  c.n_d = doc.value("n_d", c.n_d);
  c.n_a = doc.value("n_a", c.n_a);
  c.gamma = doc.value("gamma", c.gamma);
  c.n_shared = doc.value("n_shared", c.n_shared);
  c.n_independent = doc.value("n_independent", c.n_independent);
  c.latent_dim = doc.value("latent_dim", c.latent_dim);
  c.projection_dim = doc.value("projection_dim", c.projection_dim);
  c.bn_momentum = doc.value("bn_momentum", c.bn_momentum);
  return c;
}

Linear::Linear(const std::string& name, int in, int out, bool with_bias, Rng& rng)
    : weight(name + ".weight", glorot_uniform(in, out, rng)),
      bias(name + ".bias", Matrix::Zero(1, out)),
      has_bias(with_bias) {}

Var Linear::operator()(Tape& tape, Var x) {
  Var y = matmul(x, tape.param(weight));
  return has_bias ? add_row(y, tape.param(bias)) : y;
}

TabNetEncoder::TabNetEncoder(TabNetConfig cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(seed);
  const int width = cfg_.n_d + cfg_.n_a;
  const double mom = cfg_.bn_momentum;

  input_bn_ = BatchNorm("input_bn", cfg_.input_dim, mom);
  for (int i = 0; i < cfg_.n_shared; ++i) {
    shared_fc_.emplace_back("shared" + std::to_string(i) + ".fc", i == 0 ? cfg_.input_dim : width, 2 * width, false, rng);
  }
  for (int s = 0; s <= cfg_.n_steps; ++s) {
    std::vector<BatchNorm> norms;
    for (int i = 0; i < cfg_.n_shared; ++i) {
      norms.emplace_back("step" + std::to_string(s) + ".shared" + std::to_string(i) + ".bn", 2 * width, mom);
    }
    shared_bn_.push_back(std::move(norms));
    std::vector<GluBlock> blocks;
    for (int i = 0; i < cfg_.n_independent; ++i) {
      const int in = (cfg_.n_shared == 0 && i == 0) ? cfg_.input_dim : width;
      blocks.push_back(make_glu_block("step" + std::to_string(s) + ".glu" + std::to_string(i), in, width, mom, rng));
    }
    independent_.push_back(std::move(blocks));
  }
  for (int s = 1; s <= cfg_.n_steps; ++s) {
    const std::string name = "step" + std::to_string(s) + ".attention";
    attention_.push_back(GluBlock{Linear(name + ".fc", cfg_.n_a, cfg_.input_dim, false, rng),
                                  BatchNorm(name + ".bn", cfg_.input_dim, mom)});
  }
  final_ = Linear("final", cfg_.n_d, cfg_.latent_dim, true, rng);
  head1_ = Linear("head1", cfg_.latent_dim, cfg_.projection_dim, true, rng);
  head2_ = Linear("head2", cfg_.projection_dim, cfg_.projection_dim, true, rng);
}

std::vector<BatchNorm*> TabNetEncoder::batch_norms() {
  std::vector<BatchNorm*> out{&input_bn_};
  for (auto& step : shared_bn_) {
    for (auto& bn : step) out.push_back(&bn);
  }
  for (auto& step : independent_) {
    for (auto& b : step) out.push_back(&b.bn);
  }
  for (auto& b : attention_) out.push_back(&b.bn);
  return out;
}

std::vector<Parameter*> TabNetEncoder::parameters() {
  std::vector<Parameter*> out;
  auto add_linear = [&](Linear& l) {
    out.push_back(&l.weight);
    if (l.has_bias) out.push_back(&l.bias);
  };
  auto add_block = [&](GluBlock& b) {
    add_linear(b.fc);
    out.push_back(&b.bn.gamma);
    out.push_back(&b.bn.beta);
  };
  out.push_back(&input_bn_.gamma);
  out.push_back(&input_bn_.beta);
  for (auto& l : shared_fc_) add_linear(l);
  for (auto& step : shared_bn_) {
    for (auto& bn : step) {
      out.push_back(&bn.gamma);
      out.push_back(&bn.beta);
    }
  }
  for (auto& step : independent_) {
    for (auto& b : step) add_block(b);
  }
  for (auto& b : attention_) add_block(b);
  add_linear(final_);
  add_linear(head1_);
  add_linear(head2_);
  return out;
}

std::vector<NamedTensor> TabNetEncoder::state(const std::string& prefix) {
  std::vector<NamedTensor> out;
  for (Parameter* p : parameters()) out.emplace_back(prefix + p->name, p->value);
  for (BatchNorm* bn : batch_norms()) {
    const std::string base = prefix + bn->gamma.name.substr(0, bn->gamma.name.size() - 6);
    out.emplace_back(base + ".running_mean", bn->running_mean);
    out.emplace_back(base + ".running_var", bn->running_var);
  }
  return out;
}

std::size_t TabNetEncoder::parameter_count() {
  std::size_t n = 0;
  for (const Parameter* p : parameters()) n += static_cast<std::size_t>(p->value.size());
  return n;
}

Var TabNetEncoder::feature_transform(Tape& tape, Var x, std::size_t transformer, Mode mode) {
  Var h = x;
  bool first = true;
  auto residual = [&](Var y) {
    h = first ? y : affine_scalar(add(h, y), kResidualScale, 0.0);
    first = false;
  };
  for (std::size_t i = 0; i < shared_fc_.size(); ++i) {
    residual(glu(batch_norm(tape, shared_fc_[i](tape, h), shared_bn_[transformer][i], mode)));
  }
  for (auto& block : independent_[transformer]) residual(apply(tape, block, h, mode));
  return h;
}

TabNetEncoder::Output TabNetEncoder::forward(Tape& tape, Var x, Mode mode) {
  if (x.cols() != cfg_.input_dim) {
    throw InputError("TabNetEncoder: expected " + std::to_string(cfg_.input_dim) + " input columns, got " +
                     std::to_string(x.cols()));
  }
  const Eigen::Index batch = x.rows();
  Output out;
  Var features = batch_norm(tape, x, input_bn_, mode);
  Var attended = cols(feature_transform(tape, features, 0, mode), cfg_.n_d, cfg_.n_a);
  Var prior = tape.constant(Matrix::Ones(batch, cfg_.input_dim));
  Var decision = tape.constant(Matrix::Zero(batch, cfg_.n_d));

  for (int step = 0; step < cfg_.n_steps; ++step) {
    GluBlock& att = attention_[static_cast<std::size_t>(step)];
    Var logits = mul(batch_norm(tape, att.fc(tape, attended), att.bn, mode), prior);
    // A feature whose prior has reached zero cannot be selected again.
    const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> exhausted = prior.value().array() == 0.0;
    Var mask = sparsemax(logits, exhausted);
    prior = mul(prior, affine_scalar(mask, -1.0, cfg_.gamma));

    Var h = feature_transform(tape, mul(mask, features), static_cast<std::size_t>(step) + 1, mode);
    Var d = relu(cols(h, 0, cfg_.n_d));
    decision = add(decision, d);
    attended = cols(h, cfg_.n_d, cfg_.n_a);

    out.trace.masks.push_back(mask.value());
    out.trace.priors.push_back(prior.value());
    out.trace.mask_logits.push_back(logits.value());
    out.trace.contributions.push_back(d.value().rowwise().sum());
  }
  out.latent = final_(tape, decision);
  out.projected = head2_(tape, relu(head1_(tape, out.latent)));
  return out;
}

Encoding encode(TabNetEncoder& encoder, const Matrix& x, Mode mode) {
  Tape tape;
  auto out = encoder.forward(tape, tape.constant(x), mode);
  return Encoding{out.latent.value(), out.projected.value(), std::move(out.trace)};
}

FeatureImportances feature_importances(const StepTrace& trace) {
  if (trace.masks.empty()) throw InputError("feature_importances: empty trace");
  const Eigen::Index batch = trace.masks.front().rows();
  const Eigen::Index width = trace.masks.front().cols();
  Vector total = Vector::Zero(width);
  for (Eigen::Index b = 0; b < batch; ++b) {
    Vector sample = Vector::Zero(width);
    for (std::size_t t = 0; t < trace.masks.size(); ++t) {
      sample += trace.contributions[t](b) * trace.masks[t].row(b).transpose();
    }
    const double s = sample.sum();
    if (s > 0.0) total += sample / s;
  }
  FeatureImportances out;
  const double s = total.sum();
  if (!(s > 0.0)) {
    out.weights = Vector::Constant(width, 1.0 / static_cast<double>(width));
    out.uniform_fallback = true;
  } else {
    out.weights = total / s;
  }
  return out;
}

}  // namespace contab

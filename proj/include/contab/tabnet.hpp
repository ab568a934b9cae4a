#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "contab/rng.hpp"
#include "contab/snapshot.hpp"
#include "contab/tensor.hpp"

namespace contab {

/// Architecture of one attentive tabular encoder. Only latent_dim and
/// projection_dim (64/64) come from the model description; the step count,
/// relaxation and stack depths are the usual TabNet defaults.
struct TabNetConfig {
  int input_dim = 0;
  int n_steps = 3;
  int n_d = 64;  // decision width
  int n_a = 64;  // attention width
  double gamma = 1.3;  // prior relaxation
  int n_shared = 2;
  int n_independent = 2;
  int latent_dim = 64;
  int projection_dim = 64;
  double bn_momentum = 0.9;

  void validate() const;
};

nlohmann::json to_json(const TabNetConfig& cfg);
/// Missing keys keep their defaults.
TabNetConfig tabnet_config_from_json(const nlohmann::json& doc, TabNetConfig base = {});

/// x W (+ b). Glorot-uniform weights, zero bias.
struct Linear {
  Parameter weight;
  Parameter bias;
  bool has_bias = true;

  Linear() = default;
  Linear(const std::string& name, int in, int out, bool with_bias, Rng& rng);
  Var operator()(Tape& tape, Var x);
};

/// fc -> batch norm -> GLU
struct GluBlock {
  Linear fc;
  BatchNorm bn;
};

/// Per-step record of the attentive selection.
struct StepTrace {
  std::vector<Matrix> masks;          // batch x input_dim, rows on the simplex
  std::vector<Matrix> priors;         // prior scale after each step
  std::vector<Matrix> mask_logits;    // prior-scaled sparsemax inputs
  std::vector<Vector> contributions;  // per-sample sum of ReLU decision outputs
};

class TabNetEncoder {
 public:
  TabNetEncoder() = default;
  TabNetEncoder(TabNetConfig cfg, std::uint64_t seed);

  const TabNetConfig& config() const { return cfg_; }
  std::vector<Parameter*> parameters();
  /// Parameters and batch-norm running statistics under stable names.
  std::vector<NamedTensor> state(const std::string& prefix = "");
  std::size_t parameter_count();

  struct Output {
    Var latent;
    Var projected;
    StepTrace trace;
  };
  /// Throws InputError if x does not have config().input_dim columns.
  Output forward(Tape& tape, Var x, Mode mode);

 private:
  /// Transformer 0 is the initial splitter, transformer s the one of step s.
  Var feature_transform(Tape& tape, Var x, std::size_t transformer, Mode mode);
  std::vector<BatchNorm*> batch_norms();

  TabNetConfig cfg_;
  BatchNorm input_bn_;
  std::vector<Linear> shared_fc_;                   // weights shared by every transformer
  std::vector<std::vector<BatchNorm>> shared_bn_;  // per transformer, one per shared layer
  std::vector<std::vector<GluBlock>> independent_;  // [0] is the initial splitter, then one per step
  std::vector<GluBlock> attention_;                 // one per step: fc n_a -> input_dim, bn
  Linear final_;
  Linear head1_;
  Linear head2_;
};

struct Encoding {
  Matrix latent;
  Matrix projected;
  StepTrace trace;
};

/// Forward pass without gradients.
Encoding encode(TabNetEncoder& encoder, const Matrix& x, Mode mode);

struct FeatureImportances {
  Vector weights;  // non-negative, sums to 1
  bool uniform_fallback = false;
};

/// Masks aggregated over steps, weighted per sample by each step's decision
/// contribution, normalized per sample, averaged over the batch and normalized.
/// All-zero contributions give uniform weights with uniform_fallback set.
FeatureImportances feature_importances(const StepTrace& trace);

}  // namespace contab

#include "contab/contrastive.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "contab/error.hpp"
#include "contab/optim.hpp"
#include "contab/rng.hpp"

namespace contab {

std::string to_string(Denominator d) { return d == Denominator::ExcludeSelf ? "exclude-self" : "exclude-positive"; }
std::string to_string(Fusion f) { return f == Fusion::Mean ? "mean" : "concat"; }
std::string to_string(EmbeddingSource s) { return s == EmbeddingSource::Latent ? "latent" : "projection"; }

void TrainConfig::validate() const {
  if (epochs < 0) throw InputError("TrainConfig: epochs must be >= 0");
  if (batch_size < 2) throw InputError("TrainConfig: batch_size must be >= 2");
  if (!(temperature > 0.0)) throw InputError("TrainConfig: temperature must be > 0");
  if (!(lr >= 0.0)) throw InputError("TrainConfig: lr must be >= 0");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"lr", c.lr},
          {"temperature", c.temperature},
          {"seed", c.seed},
          {"denominator", to_string(c.denominator)},
          {"fusion", to_string(c.fusion)},
          {"embedding_source", to_string(c.source)}};
}

TrainConfig train_config_from_json(const nlohmann::json& doc, TrainConfig c) {
  c.epochs = doc.value("epochs", c.epochs);
  c.batch_size = doc.value("batch_size", c.batch_size);
  c.lr = doc.value("lr", c.lr);
  c.temperature = doc.value("temperature", c.temperature);
  c.seed = doc.value("seed", c.seed);
  if (doc.contains("denominator")) {
    const auto d = doc.at("denominator").get<std::string>();
    if (d == "exclude-self") c.denominator = Denominator::ExcludeSelf;
    else if (d == "exclude-positive") c.denominator = Denominator::ExcludePositive;
    else throw InputError("unknown denominator convention: " + d);
  }
  if (doc.contains("fusion")) {
    const auto f = doc.at("fusion").get<std::string>();
    if (f == "mean") c.fusion = Fusion::Mean;
    else if (f == "concat") c.fusion = Fusion::Concat;
    else throw InputError("unknown fusion: " + f);
  }
  if (doc.contains("embedding_source")) {
    const auto s = doc.at("embedding_source").get<std::string>();
    if (s == "latent") c.source = EmbeddingSource::Latent;
    else if (s == "projection") c.source = EmbeddingSource::Projection;
    else throw InputError("unknown embedding_source: " + s);
  }
  c.validate();
  return c;
}

Var nt_xent_loss(Var embeddings, double temperature, Denominator denominator) {
  if (!(temperature > 0.0)) throw InputError("nt_xent_loss: temperature must be > 0");
  const Eigen::Index views = embeddings.rows();
  if (views < 2 || views % 2 != 0) throw InputError("nt_xent_loss: need an even number (>= 2) of view rows");
  const Eigen::Index n = views / 2;
  if (denominator == Denominator::ExcludePositive && n < 2) {
    throw InputError("nt_xent_loss: exclude-positive needs at least two pairs");
  }
  Tape& tape = *embeddings.tape();
  Var unit = l2_normalize_rows(embeddings);
  const Matrix& u = unit.value();
  const Matrix logits = (u * u.transpose()) / temperature;

  // coeff(i, k) = d loss / d logits(i, k)
  Matrix coeff = Matrix::Zero(views, views);
  double total = 0.0;
  for (Eigen::Index i = 0; i < views; ++i) {
    const Eigen::Index pos = i < n ? i + n : i - n;
    double shift = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < views; ++k) {
      if (k == i || (denominator == Denominator::ExcludePositive && k == pos)) continue;
      shift = std::max(shift, logits(i, k));
    }
    double z = 0.0;
    for (Eigen::Index k = 0; k < views; ++k) {
      if (k == i || (denominator == Denominator::ExcludePositive && k == pos)) continue;
      const double e = std::exp(logits(i, k) - shift);
      coeff(i, k) = e;
      z += e;
    }
    total += -(logits(i, pos) - shift - std::log(z));
    coeff.row(i) /= z;
    coeff(i, pos) -= 1.0;
  }
  const double scale = 1.0 / static_cast<double>(views);
  Matrix out(1, 1);
  out(0, 0) = total * scale;
  coeff *= scale / temperature;  // now d loss / d similarity
  return tape.record("nt_xent", std::move(out), tape.requires_grad(unit), [unit, coeff](const Matrix& g, Tape& tp) {
    tp.accumulate(unit, ((coeff + coeff.transpose()) * unit.value()) * g(0, 0));
  });
}

double nt_xent_value(const Matrix& embeddings, double temperature, Denominator denominator) {
  Tape tape;
  return nt_xent_loss(tape.constant(embeddings), temperature, denominator).value()(0, 0);
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n_cohorts, std::size_t batch_size, std::uint64_t epoch,
                                                   std::uint64_t seed) {
  if (n_cohorts < 2) throw InputError("make_batches: need at least 2 cohorts");
  if (batch_size < 2) throw InputError("make_batches: batch_size must be >= 2");
  std::vector<std::size_t> order(n_cohorts);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "batches", epoch));
  rng.shuffle(order);

  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n_cohorts; start += batch_size) {
    const std::size_t end = std::min(n_cohorts, start + batch_size);
    if (end - start == 1 && !batches.empty()) {
      batches.back().push_back(order[start]);
    } else {
      batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                           order.begin() + static_cast<std::ptrdiff_t>(end));
    }
  }
  return batches;
}

Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& index) {
  Matrix out(static_cast<Eigen::Index>(index.size()), m.cols());
  for (std::size_t i = 0; i < index.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(index[i]));
  return out;
}

TrainedModel train(const CohortDataset& dataset, const TrainConfig& cfg, const TabNetConfig& arch) {
  cfg.validate();
  if (dataset.size() < 2) throw InputError("train: need at least 2 cohorts");
  TabNetConfig gene_cfg = arch;
  gene_cfg.input_dim = static_cast<int>(dataset.scaled_gene.cols());
  TabNetConfig chrom_cfg = arch;
  chrom_cfg.input_dim = static_cast<int>(dataset.scaled_chrom.cols());

  TrainedModel model{TabNetEncoder(gene_cfg, derive_seed(cfg.seed, "init/gene")),
                     TabNetEncoder(chrom_cfg, derive_seed(cfg.seed, "init/chrom")),
                     {}};
  std::vector<Parameter*> params = model.gene.parameters();
  for (Parameter* p : model.chrom.parameters()) params.push_back(p);
  AdamState adam(params, AdamConfig{.lr = cfg.lr});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto batches = make_batches(dataset.size(), static_cast<std::size_t>(cfg.batch_size),
                                      static_cast<std::uint64_t>(epoch), cfg.seed);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      zero_grad(params);
      Tape tape;
      double loss_value = 0.0;
      try {
        auto g = model.gene.forward(tape, tape.constant(gather_rows(dataset.scaled_gene, batches[b])), Mode::Train);
        auto c = model.chrom.forward(tape, tape.constant(gather_rows(dataset.scaled_chrom, batches[b])), Mode::Train);
        Var loss = nt_xent_loss(vstack(g.projected, c.projected), cfg.temperature, cfg.denominator);
        loss_value = loss.value()(0, 0);
        tape.backward(loss);
      } catch (const NumericalError& e) {
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                             std::to_string(b + 1) + ": " + e.what());
      }
      adam_step(params, adam);
      epoch_loss += loss_value;
    }
    model.loss_history.push_back(epoch_loss / static_cast<double>(batches.size()));
  }
  return model;
}

EmbeddingMatrix fuse_views(const std::vector<std::string>& names, const Matrix& gene_latent, const Matrix& chrom_latent,
                           Fusion fusion) {
  Tape tape;
  const Matrix g = l2_normalize_rows(tape.constant(gene_latent)).value();
  const Matrix c = l2_normalize_rows(tape.constant(chrom_latent)).value();
  EmbeddingMatrix out{names, {}, to_string(fusion)};
  if (fusion == Fusion::Mean) {
    out.vectors = 0.5 * (g + c);
  } else {
    out.vectors.resize(g.rows(), g.cols() + c.cols());
    out.vectors << g, c;
  }
  return out;
}

EmbeddingMatrix embed_cohorts(TabNetEncoder& gene, TabNetEncoder& chrom, const CohortDataset& dataset, Fusion fusion,
                              EmbeddingSource source) {
  const Encoding g = encode(gene, dataset.scaled_gene, Mode::Eval);
  const Encoding c = encode(chrom, dataset.scaled_chrom, Mode::Eval);
  const bool latent = source == EmbeddingSource::Latent;
  return fuse_views(dataset.names(), latent ? g.latent : g.projected, latent ? c.latent : c.projected, fusion);
}

}  // namespace contab

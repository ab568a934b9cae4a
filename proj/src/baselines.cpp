#include "contab/baselines.hpp"

#include <cmath>
#include <numeric>

#include "contab/cluster.hpp"
#include "contab/error.hpp"
#include "contab/optim.hpp"
#include "contab/tabnet.hpp"

namespace contab {
namespace {

constexpr double kTiny = 1e-300;

void check_finite_loss(double value, int epoch, const char* method) {
  if (!std::isfinite(value)) {
    throw NumericalError(std::string(method) + ": non-finite loss at epoch " + std::to_string(epoch + 1));
  }
}

std::vector<Parameter*> params_of(std::initializer_list<Linear*> layers) {
  std::vector<Parameter*> out;
  for (Linear* l : layers) {
    out.push_back(&l->weight);
    if (l->has_bias) out.push_back(&l->bias);
  }
  return out;
}

// d -> hidden (ReLU) -> latent
struct Mlp {
  Linear l1;
  Linear l2;

  Mlp(int in, int hidden, int latent, Rng& rng) : l1("mlp1", in, hidden, true, rng), l2("mlp2", hidden, latent, true, rng) {}
  Var operator()(Tape& tape, Var x) { return l2(tape, relu(l1(tape, x))); }
  Matrix eval(const Matrix& x) {
    Tape tape;
    return (*this)(tape, tape.constant(x)).value();
  }
};

}  // namespace

Matrix concat_features(const CohortDataset& dataset) {
  Matrix out(dataset.scaled_gene.rows(), dataset.scaled_gene.cols() + dataset.scaled_chrom.cols());
  out << dataset.scaled_gene, dataset.scaled_chrom;
  return out;
}

NmfResult nmf_fit(const Matrix& x, int rank, int iterations, std::uint64_t seed) {
  if ((x.array() < 0.0).any()) throw InputError("nmf_fit: input has negative entries");
  if (rank < 1 || rank > std::min(x.rows(), x.cols())) {
    throw InputError("nmf_fit: rank " + std::to_string(rank) + " outside [1, min(n, m)]");
  }
  Rng rng(seed);
  NmfResult out;
  out.w.resize(x.rows(), rank);
  out.h.resize(rank, x.cols());
  for (Eigen::Index i = 0; i < out.w.size(); ++i) out.w(i) = rng.uniform_positive();
  for (Eigen::Index i = 0; i < out.h.size(); ++i) out.h(i) = rng.uniform_positive();

  for (int it = 0; it < iterations; ++it) {
    const Matrix wt_x = out.w.transpose() * x;
    const Matrix wt_wh = out.w.transpose() * out.w * out.h;
    out.h.array() *= wt_x.array() / (wt_wh.array() + kTiny);
    const Matrix x_ht = x * out.h.transpose();
    const Matrix w_hht = out.w * (out.h * out.h.transpose());
    out.w.array() *= x_ht.array() / (w_hht.array() + kTiny);
    out.objective.push_back((x - out.w * out.h).squaredNorm());
  }
  return out;
}

AeConfig BaselineConfig::ae_config() const {
  AeConfig c = ae;
  c.seed = derive_seed(seed, "baseline/ae");
  return c;
}

SimclrConfig BaselineConfig::simclr_config() const {
  SimclrConfig c = simclr;
  c.seed = derive_seed(seed, "baseline/simclr");
  return c;
}

DeepClusterConfig BaselineConfig::deepcluster_config() const {
  DeepClusterConfig c = deepcluster;
  c.seed = derive_seed(seed, "baseline/deepcluster");
  return c;
}

nlohmann::json to_json(const BaselineConfig& c) {
  return {{"seed", c.seed},
          {"nmf", {{"rank", c.nmf_rank}, {"iterations", c.nmf_iterations}}},
          {"ae", {{"hidden", c.ae.hidden}, {"epochs", c.ae.epochs}, {"batch_size", c.ae.batch_size}, {"lr", c.ae.lr}}},
          {"simclr",
           {{"hidden", c.simclr.hidden},
            {"latent", c.simclr.latent},
            {"projection", c.simclr.projection},
            {"epochs", c.simclr.epochs},
            {"batch_size", c.simclr.batch_size},
            {"lr", c.simclr.lr},
            {"temperature", c.simclr.temperature},
            {"drop_prob", c.simclr.drop_prob}}},
          {"deepcluster",
           {{"hidden", c.deepcluster.hidden},
            {"latent", c.deepcluster.latent},
            {"k_pseudo", c.deepcluster.k_pseudo},
            {"epochs", c.deepcluster.epochs},
            {"batch_size", c.deepcluster.batch_size},
            {"lr", c.deepcluster.lr}}}};
}

BaselineConfig baseline_config_from_json(const nlohmann::json& doc, BaselineConfig c) {
  c.seed = doc.value("seed", c.seed);
  if (doc.contains("nmf")) {
    const auto& d = doc["nmf"];
    c.nmf_rank = d.value("rank", c.nmf_rank);
    c.nmf_iterations = d.value("iterations", c.nmf_iterations);
  }
  if (doc.contains("ae")) {
    const auto& d = doc["ae"];
    c.ae.hidden = d.value("hidden", c.ae.hidden);
    c.ae.epochs = d.value("epochs", c.ae.epochs);
    c.ae.batch_size = d.value("batch_size", c.ae.batch_size);
    c.ae.lr = d.value("lr", c.ae.lr);
  }
  if (doc.contains("simclr")) {
    const auto& d = doc["simclr"];
    c.simclr.hidden = d.value("hidden", c.simclr.hidden);
    c.simclr.latent = d.value("latent", c.simclr.latent);
    c.simclr.projection = d.value("projection", c.simclr.projection);
    c.simclr.epochs = d.value("epochs", c.simclr.epochs);
    c.simclr.batch_size = d.value("batch_size", c.simclr.batch_size);
    c.simclr.lr = d.value("lr", c.simclr.lr);
    c.simclr.temperature = d.value("temperature", c.simclr.temperature);
    c.simclr.drop_prob = d.value("drop_prob", c.simclr.drop_prob);
  }
  if (doc.contains("deepcluster")) {
    const auto& d = doc["deepcluster"];
    c.deepcluster.hidden = d.value("hidden", c.deepcluster.hidden);
    c.deepcluster.latent = d.value("latent", c.deepcluster.latent);
    c.deepcluster.k_pseudo = d.value("k_pseudo", c.deepcluster.k_pseudo);
    c.deepcluster.epochs = d.value("epochs", c.deepcluster.epochs);
    c.deepcluster.batch_size = d.value("batch_size", c.deepcluster.batch_size);
    c.deepcluster.lr = d.value("lr", c.deepcluster.lr);
  }
  return c;
}

TrainedEmbedding ae_train(const Matrix& x, const std::vector<std::string>& names, const AeConfig& cfg) {
  if (cfg.hidden < 1 || cfg.batch_size < 2) throw InputError("ae_train: invalid configuration");
  Rng rng(cfg.seed);
  const int width = static_cast<int>(x.cols());
  Linear encoder("ae.encoder", width, cfg.hidden, true, rng);
  Linear decoder("ae.decoder", cfg.hidden, width, true, rng);
  const auto params = params_of({&encoder, &decoder});
  AdamState adam(params, AdamConfig{.lr = cfg.lr});

  TrainedEmbedding out;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto batches = make_batches(static_cast<std::size_t>(x.rows()), static_cast<std::size_t>(cfg.batch_size),
                                      static_cast<std::uint64_t>(epoch), cfg.seed);
    double total = 0.0;
    for (const auto& batch : batches) {
      zero_grad(params);
      Tape tape;
      Var input = tape.constant(gather_rows(x, batch));
      Var loss = mse(decoder(tape, relu(encoder(tape, input))), input);
      tape.backward(loss);
      adam_step(params, adam);
      total += loss.value()(0, 0);
    }
    out.loss_history.push_back(total / static_cast<double>(batches.size()));
    check_finite_loss(out.loss_history.back(), epoch, "ae_train");
  }
  Tape tape;
  out.embedding = EmbeddingMatrix{names, relu(encoder(tape, tape.constant(x))).value(), "ae"};
  return out;
}

std::pair<Matrix, Matrix> dropout_views(const Matrix& x, double p, Rng& rng) {
  if (!(p > 0.0 && p < 1.0)) throw InputError("dropout_views: probability must lie in (0, 1)");
  Matrix a = x;
  Matrix b = x;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      if (rng.uniform() < p) a(r, c) = 0.0;
      if (rng.uniform() < p) b(r, c) = 0.0;
    }
  }
  return {std::move(a), std::move(b)};
}

TrainedEmbedding simclr_mlp_train(const Matrix& x, const std::vector<std::string>& names, const SimclrConfig& cfg) {
  if (!(cfg.drop_prob > 0.0 && cfg.drop_prob < 1.0)) throw InputError("simclr: drop_prob must lie in (0, 1)");
  Rng init(derive_seed(cfg.seed, "init"));
  Mlp mlp(static_cast<int>(x.cols()), cfg.hidden, cfg.latent, init);
  Linear head1("simclr.head1", cfg.latent, cfg.projection, true, init);
  Linear head2("simclr.head2", cfg.projection, cfg.projection, true, init);
  const auto params = params_of({&mlp.l1, &mlp.l2, &head1, &head2});
  AdamState adam(params, AdamConfig{.lr = cfg.lr});
  Rng augment(derive_seed(cfg.seed, "augment"));

  TrainedEmbedding out;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto batches = make_batches(static_cast<std::size_t>(x.rows()), static_cast<std::size_t>(cfg.batch_size),
                                      static_cast<std::uint64_t>(epoch), cfg.seed);
    double total = 0.0;
    for (const auto& batch : batches) {
      zero_grad(params);
      auto [va, vb] = dropout_views(gather_rows(x, batch), cfg.drop_prob, augment);
      Tape tape;
      Var views = tape.constant((Matrix(va.rows() * 2, va.cols()) << va, vb).finished());
      Var projected = head2(tape, relu(head1(tape, mlp(tape, views))));
      Var loss = nt_xent_loss(projected, cfg.temperature);
      tape.backward(loss);
      adam_step(params, adam);
      total += loss.value()(0, 0);
    }
    out.loss_history.push_back(total / static_cast<double>(batches.size()));
    check_finite_loss(out.loss_history.back(), epoch, "simclr_mlp_train");
  }
  out.embedding = EmbeddingMatrix{names, mlp.eval(x), "simclr"};
  return out;
}

DeepClusterResult deepcluster_train(const Matrix& x, const std::vector<std::string>& names,
                                    const DeepClusterConfig& cfg) {
  if (cfg.k_pseudo < 2 || cfg.k_pseudo > x.rows()) throw InputError("deepcluster: k_pseudo must lie in [2, n]");
  Rng init(derive_seed(cfg.seed, "init"));
  Mlp mlp(static_cast<int>(x.cols()), cfg.hidden, cfg.latent, init);
  const auto mlp_params = params_of({&mlp.l1, &mlp.l2});
  AdamState adam(mlp_params, AdamConfig{.lr = cfg.lr});

  DeepClusterResult out;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto ep = static_cast<std::uint64_t>(epoch);
    const ClusterAssignment pseudo = kmeans(mlp.eval(x), cfg.k_pseudo, derive_seed(cfg.seed, "kmeans", ep));
    out.pseudo_labels.push_back(pseudo.labels);

    Rng head_rng(derive_seed(cfg.seed, "head", ep));
    Linear head("deepcluster.head", cfg.latent, cfg.k_pseudo, true, head_rng);
    out.head_checksums.push_back(head.weight.value.sum() + head.bias.value.sum());
    const auto head_params = params_of({&head});
    AdamState head_adam(head_params, AdamConfig{.lr = cfg.lr});

    const auto batches = make_batches(static_cast<std::size_t>(x.rows()), static_cast<std::size_t>(cfg.batch_size), ep,
                                      cfg.seed);
    double total = 0.0;
    for (const auto& batch : batches) {
      zero_grad(mlp_params);
      zero_grad(head_params);
      std::vector<int> targets;
      for (std::size_t i : batch) targets.push_back(pseudo.labels[i]);
      Tape tape;
      Var logits = head(tape, relu(mlp(tape, tape.constant(gather_rows(x, batch)))));
      Var loss = softmax_cross_entropy(logits, targets);
      tape.backward(loss);
      adam_step(mlp_params, adam);
      adam_step(head_params, head_adam);
      total += loss.value()(0, 0);
    }
    out.loss_history.push_back(total / static_cast<double>(batches.size()));
    check_finite_loss(out.loss_history.back(), epoch, "deepcluster_train");
  }
  out.embedding = EmbeddingMatrix{names, mlp.eval(x), "deepcluster"};
  return out;
}

Dendrogram ward_linkage(const Matrix& x) {
  const Eigen::Index n = x.rows();
  if (n < 1) throw InputError("ward_linkage: empty input");
  Matrix d2 = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) d2(i, j) = d2(j, i) = (x.row(i) - x.row(j)).squaredNorm();
  }
  std::vector<int> id(static_cast<std::size_t>(n));
  std::vector<int> size(static_cast<std::size_t>(n), 1);
  std::vector<bool> active(static_cast<std::size_t>(n), true);
  std::iota(id.begin(), id.end(), 0);

  Dendrogram tree;
  tree.leaves = static_cast<int>(n);
  for (Eigen::Index step = 0; step + 1 < n; ++step) {
    Eigen::Index bi = -1, bj = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (active[static_cast<std::size_t>(j)] && d2(i, j) < best) {
          best = d2(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    const auto si = static_cast<double>(size[static_cast<std::size_t>(bi)]);
    const auto sj = static_cast<double>(size[static_cast<std::size_t>(bj)]);
    for (Eigen::Index k = 0; k < n; ++k) {
      if (!active[static_cast<std::size_t>(k)] || k == bi || k == bj) continue;
      const auto sk = static_cast<double>(size[static_cast<std::size_t>(k)]);
      const double updated = ((si + sk) * d2(k, bi) + (sj + sk) * d2(k, bj) - sk * best) / (si + sj + sk);
      d2(k, bi) = d2(bi, k) = std::max(0.0, updated);
    }
    const int merged_size = size[static_cast<std::size_t>(bi)] + size[static_cast<std::size_t>(bj)];
    tree.merges.push_back({std::min(id[static_cast<std::size_t>(bi)], id[static_cast<std::size_t>(bj)]),
                           std::max(id[static_cast<std::size_t>(bi)], id[static_cast<std::size_t>(bj)]),
                           std::sqrt(best), merged_size});
    active[static_cast<std::size_t>(bj)] = false;
    size[static_cast<std::size_t>(bi)] = merged_size;
    id[static_cast<std::size_t>(bi)] = static_cast<int>(n + step);
  }
  return tree;
}

std::vector<int> cut_dendrogram(const Dendrogram& tree, int k) {
  const int n = tree.leaves;
  if (k < 1) throw InputError("hierarchical: k must be >= 1");
  if (k > n) throw InputError("hierarchical: k exceeds the number of points");
  // Union-find over leaves and merge nodes.
  std::vector<int> parent(static_cast<std::size_t>(2 * n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[static_cast<std::size_t>(v)] != v) v = parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
    return v;
  };
  for (int m = 0; m < n - k; ++m) {
    const auto& merge = tree.merges[static_cast<std::size_t>(m)];
    parent[static_cast<std::size_t>(find(merge.a))] = n + m;
    parent[static_cast<std::size_t>(find(merge.b))] = n + m;
  }
  std::vector<int> roots;
  for (int i = 0; i < n; ++i) roots.push_back(find(i));
  return canonical_labels(roots);
}

std::vector<int> hierarchical_labels(const Matrix& x, int k) {
  if (k < 1) throw InputError("hierarchical: k must be >= 1");
  return cut_dendrogram(ward_linkage(x), k);
}

}  // namespace contab

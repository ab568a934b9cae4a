#include "contab/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include "contab/error.hpp"
#include "contab/rng.hpp"

namespace contab {
namespace {

constexpr int kSharedGenes = 20;
constexpr int kPreferredGenes = 20;  // per cluster
constexpr int kUniverse = kSharedGenes + 2 * kPreferredGenes;
constexpr double kGeneLoad = 20000.0;
constexpr double kChromLoad = 30000.0;
// Log-fold cluster effects per unit of separation.
constexpr double kLoadShift = 0.5;
constexpr double kSpectrumShift = 0.3;
constexpr double kChromShift = 0.1;
constexpr double kGeneShift = 0.5;
// Within-cluster log-scale jitter.
constexpr double kLoadJitter = 0.2;
constexpr double kGeneJitter = 0.3;

using Spectrum = std::array<double, kSubstitutionCount>;

Spectrum cluster_spectrum(int cluster, double s) {
  Spectrum spec;
  spec.fill(0.06);
  spec[index_of(Substitution::CT)] = 0.2;
  spec[index_of(Substitution::GA)] = 0.2;
  if (cluster == 0) {
    spec[index_of(Substitution::CT)] *= std::exp(kSpectrumShift * s);
    spec[index_of(Substitution::GA)] *= std::exp(kSpectrumShift * s);
  } else {
    spec[index_of(Substitution::GT)] *= std::exp(kSpectrumShift * s);
  }
  double total = 0.0;
  for (double v : spec) total += v;
  for (double& v : spec) v /= total;
  return spec;
}

std::string gene_name(int g) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "SG%03d", g + 1);
  return buf;
}

bool load_chromosome(std::size_t c) {
  // chr1, chr7, chr9, chr19
  return c == 0 || c == 6 || c == 8 || c == 18;
}

}  // namespace

SyntheticCohorts generate_synthetic_cohorts(int n_cohorts, std::uint64_t seed, double separation) {
  if (n_cohorts < 4 || n_cohorts % 2 != 0) throw InputError("synthetic: n_cohorts must be even and >= 4");
  if (!(separation >= 0.0) || !std::isfinite(separation)) throw InputError("synthetic: separation must be >= 0");
  const double s = separation;

  Rng universe(derive_seed(seed, "synthetic/universe"));
  std::array<double, kUniverse> base_weight{};
  for (double& w : base_weight) w = std::exp(universe.normal(0.0, 0.5));

  const ChromosomeLengths& lengths = grch38_lengths();
  double genome = 0.0;
  for (auto len : lengths) genome += static_cast<double>(len);

  SyntheticCohorts out;
  std::vector<CohortProfile> profiles;
  const int width = n_cohorts >= 100 ? 3 : 2;
  for (int i = 0; i < n_cohorts; ++i) {
    const int cluster = i % 2;
    out.labels.push_back(cluster);
    Rng rng(derive_seed(seed, "synthetic/cohort", static_cast<std::uint64_t>(i)));
    const Spectrum spec = cluster_spectrum(cluster, s);
    const double load_scale = std::exp((cluster == 0 ? kLoadShift * s : 0.0) + rng.normal(0.0, kLoadJitter));

    std::array<double, kUniverse> weight{};
    double weight_total = 0.0;
    for (int g = 0; g < kUniverse; ++g) {
      double w = base_weight[static_cast<std::size_t>(g)] * std::exp(rng.normal(0.0, kGeneJitter));
      const int preferred = g < kSharedGenes ? -1 : (g - kSharedGenes) / kPreferredGenes;
      if (preferred == cluster) w *= std::exp(kGeneShift * s);
      weight[static_cast<std::size_t>(g)] = w;
      weight_total += w;
    }
    GeneTally tally;
    for (int g = 0; g < kUniverse; ++g) {
      std::array<std::int64_t, kSubstitutionCount> counts{};
      std::int64_t total = 0;
      for (std::size_t j = 0; j < kSubstitutionCount; ++j) {
        const double rate = kGeneLoad * load_scale * weight[static_cast<std::size_t>(g)] / weight_total * spec[j];
        counts[j] = static_cast<std::int64_t>(rng.poisson(rate));
        total += counts[j];
      }
      if (total > 0) tally.emplace(gene_name(g), counts);
    }

    ChromosomeCounts chrom = ChromosomeCounts::Zero();
    for (std::size_t c = 0; c < kChromosomeCount; ++c) {
      const double share = static_cast<double>(lengths[c]) / genome * (cluster == 0 && load_chromosome(c) ? std::exp(kChromShift * s) : 1.0);
      for (std::size_t j = 0; j < kSubstitutionCount; ++j) {
        chrom(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) =
            static_cast<std::int64_t>(rng.poisson(kChromLoad * load_scale * share * spec[j]));
      }
    }

    char name[32];
    std::snprintf(name, sizeof name, "cohort_%0*d", width, i);
    CohortProfile profile;
    profile.name = name;
    profile.gene = build_gene_view(tally);
    profile.chrom = build_chromosome_view(chrom, lengths);
    profiles.push_back(std::move(profile));
  }
  out.dataset = scale_features(std::move(profiles));
  return out;
}

}  // namespace contab

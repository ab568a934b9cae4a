#pragma once

#include <cstdint>
#include <vector>

#include "contab/ingest.hpp"

namespace contab {

struct SyntheticCohorts {
  CohortDataset dataset;
  /// Planted cluster per cohort: 0 = high-load C>T/G>A-rich, 1 = low-load G>T-rich.
  std::vector<int> labels;
};

/// Two-cluster planted dataset. Cluster 0 carries elevated C>T and G>A and a
/// higher mutation load; cluster 1 carries a lower load and elevated G>T. Both
/// views are Poisson-sampled from the cluster spectra with per-cohort load and
/// gene-propensity jitter. `separation` scales every cluster difference; at 0
/// the two clusters share one generative model. Labels alternate 0,1,0,1,...
/// Throws InputError unless n_cohorts is even and >= 4 and separation >= 0.
SyntheticCohorts generate_synthetic_cohorts(int n_cohorts, std::uint64_t seed, double separation);

}  // namespace contab

#include "contab/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "contab/error.hpp"

namespace contab {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_alternative_transcript(std::string_view gene) {
  return gene.find("_ENST") != std::string_view::npos;
}

// "c.215C>G" -> (C, G). Anything else (indels, delins, ranges) is not a substitution.
std::optional<Substitution> substitution_from_cds(std::string_view cds) {
  const std::size_t gt = cds.rfind('>');
  if (gt == std::string_view::npos || gt < 2 || gt + 2 != cds.size()) return std::nullopt;
  if (!std::isdigit(static_cast<unsigned char>(cds[gt - 2]))) return std::nullopt;
  return substitution_from_alleles(cds.substr(gt - 1, 1), cds.substr(gt + 1, 1));
}

struct ResolvedColumns {
  std::size_t gene, chromosome, cohort;
  std::optional<std::size_t> ref, alt, cds;
  std::size_t max_index;
};

ResolvedColumns resolve_header(std::string_view header, const ColumnSchema& schema) {
  std::unordered_map<std::string, std::size_t> index;
  const auto fields = split_tabs(header);
  for (std::size_t i = 0; i < fields.size(); ++i) index.emplace(std::string(trim(fields[i])), i);

  auto find = [&](const std::string& name) -> std::optional<std::size_t> {
    if (auto it = index.find(name); it != index.end()) return it->second;
    return std::nullopt;
  };
  auto require = [&](const std::string& name) {
    if (auto i = find(name)) return *i;
    throw InputError("missing column: " + name);
  };

  ResolvedColumns cols{};
  cols.gene = require(schema.gene);
  cols.chromosome = require(schema.chromosome);
  cols.cohort = require(schema.cohort);
  cols.ref = find(schema.ref);
  cols.alt = find(schema.alt);
  cols.cds = find(schema.cds);
  const bool allele_pair = cols.ref && cols.alt;
  if (!allele_pair && !cols.cds) {
    throw InputError("missing column: " + (cols.ref ? schema.alt : schema.ref) + " (or " + schema.cds + ")");
  }
  if (allele_pair) cols.cds.reset();
  cols.max_index = std::max({cols.gene, cols.chromosome, cols.cohort});
  for (auto c : {cols.ref, cols.alt, cols.cds}) {
    if (c) cols.max_index = std::max(cols.max_index, *c);
  }
  return cols;
}

// Population z-score per column; columns with std below the guard become 0.
Eigen::MatrixXd standardize(const Eigen::MatrixXd& x, FeatureScaling& params) {
  const auto n = static_cast<double>(x.rows());
  params.mean = x.colwise().sum() / n;
  const Eigen::MatrixXd centered = x.rowwise() - params.mean;
  params.stddev = (centered.colwise().squaredNorm() / n).cwiseSqrt();
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (params.stddev(j) < ScalingParams::kStdGuard) {
      out.col(j).setZero();
    } else {
      out.col(j) = centered.col(j) / params.stddev(j);
    }
  }
  return out;
}

}  // namespace

std::size_t RejectTally::total() const {
  std::size_t sum = 0;
  for (const auto& [reason, n] : counts) sum += n;
  return sum;
}

RejectTally& RejectTally::operator+=(const RejectTally& other) {
  for (const auto& [reason, n] : other.counts) counts[reason] += n;
  return *this;
}

ParseResult& ParseResult::operator+=(const ParseResult& other) {
  records.insert(records.end(), other.records.begin(), other.records.end());
  rejects += other.rejects;
  total_rows += other.total_rows;
  return *this;
}

ParseResult parse_mutations(std::istream& source, const ColumnSchema& schema) {
  std::string line;
  bool have_header = false;
  while (std::getline(source, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) {
      have_header = true;
      break;
    }
  }
  if (!have_header) throw InputError("empty input: no header row");
  const ResolvedColumns cols = resolve_header(line, schema);

  ParseResult result;
  while (std::getline(source, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++result.total_rows;

    const auto fields = split_tabs(line);
    if (fields.size() <= cols.max_index) {
      result.rejects.add(reject_reason::kWrongColumnCount);
      continue;
    }
    const std::string_view gene = trim(fields[cols.gene]);
    const std::string_view chrom = trim(fields[cols.chromosome]);
    const std::string_view cohort = trim(fields[cols.cohort]);
    if (gene.empty() || chrom.empty() || cohort.empty()) {
      result.rejects.add(reject_reason::kMissingField);
      continue;
    }
    if (is_alternative_transcript(gene)) {
      result.rejects.add(reject_reason::kAlternativeTranscript);
      continue;
    }
    const auto substitution = cols.cds ? substitution_from_cds(trim(fields[*cols.cds]))
                                       : substitution_from_alleles(trim(fields[*cols.ref]),
                                                                   trim(fields[*cols.alt]));
    if (!substitution) {
      result.rejects.add(reject_reason::kNotSubstitution);
      continue;
    }
    const auto chromosome = ChromosomeId::parse(chrom);
    if (!chromosome) {
      result.rejects.add(reject_reason::kNonCanonicalChromosome);
      continue;
    }
    result.records.push_back(MutationRecord{std::string(gene), *chromosome, *substitution, std::string(cohort)});
  }
  return result;
}

Eigen::VectorXd GeneView::flat() const {
  Eigen::VectorXd out(kGeneFeatures);
  for (std::size_t i = 0; i < kTopGenes; ++i) {
    for (std::size_t j = 0; j < kSubstitutionCount; ++j) {
      out(static_cast<Eigen::Index>(i * kSubstitutionCount + j)) = static_cast<double>(counts(i, j));
    }
  }
  return out;
}

Eigen::VectorXd ChromosomeView::flat() const {
  return Eigen::Map<const Eigen::VectorXd>(rates.data(), kChromFeatures);
}

GeneTally tally_genes(const std::vector<MutationRecord>& records) {
  GeneTally tally;
  for (const auto& r : records) {
    auto [it, inserted] = tally.try_emplace(r.gene);
    if (inserted) it->second.fill(0);
    ++it->second[index_of(r.substitution)];
  }
  return tally;
}

GeneView build_gene_view(const GeneTally& tally) {
  struct Ranked {
    const std::string* gene;
    std::int64_t total;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(tally.size());
  for (const auto& [gene, counts] : tally) {
    ranked.push_back({&gene, std::accumulate(counts.begin(), counts.end(), std::int64_t{0})});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.total != b.total) return a.total > b.total;
    return *a.gene < *b.gene;
  });

  GeneView view;
  view.empty = tally.empty();
  const std::size_t kept = std::min(ranked.size(), kTopGenes);
  for (std::size_t i = 0; i < kept; ++i) {
    view.genes[i] = *ranked[i].gene;
    const auto& counts = tally.at(*ranked[i].gene);
    for (std::size_t j = 0; j < kSubstitutionCount; ++j) view.counts(i, j) = counts[j];
  }
  return view;
}

GeneView build_gene_view(const std::vector<MutationRecord>& records) {
  return build_gene_view(tally_genes(records));
}

ChromosomeView build_chromosome_view(const ChromosomeCounts& counts, const ChromosomeLengths& lengths) {
  ChromosomeView view;
  for (std::size_t c = 0; c < kChromosomeCount; ++c) {
    const auto length = static_cast<double>(lengths[c]);
    for (std::size_t s = 0; s < kSubstitutionCount; ++s) {
      view.rates(c, s) = static_cast<double>(counts(c, s)) / length;
    }
  }
  return view;
}

ChromosomeView build_chromosome_view(const std::vector<MutationRecord>& records,
                                     const ChromosomeLengths& lengths) {
  ChromosomeCounts counts = ChromosomeCounts::Zero();
  for (const auto& r : records) ++counts(r.chromosome.index(), index_of(r.substitution));
  return build_chromosome_view(counts, lengths);
}

std::vector<CohortProfile> build_profiles(const std::vector<MutationRecord>& records,
                                          const ChromosomeLengths& lengths) {
  std::map<std::string, std::vector<MutationRecord>> by_cohort;
  for (const auto& r : records) by_cohort[r.cohort].push_back(r);
  std::vector<CohortProfile> profiles;
  profiles.reserve(by_cohort.size());
  for (const auto& [name, rows] : by_cohort) {
    profiles.push_back({name, build_gene_view(rows), build_chromosome_view(rows, lengths)});
  }
  return profiles;
}

std::vector<std::string> CohortDataset::names() const {
  std::vector<std::string> out;
  out.reserve(cohorts.size());
  for (const auto& c : cohorts) out.push_back(c.name);
  return out;
}

Eigen::MatrixXd CohortDataset::gene_counts() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(kGeneFeatures));
  for (std::size_t i = 0; i < size(); ++i) out.row(static_cast<Eigen::Index>(i)) = cohorts[i].gene.flat().transpose();
  return out;
}

Eigen::MatrixXd CohortDataset::chrom_rates() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(kChromFeatures));
  for (std::size_t i = 0; i < size(); ++i) out.row(static_cast<Eigen::Index>(i)) = cohorts[i].chrom.flat().transpose();
  return out;
}

Eigen::MatrixXd CohortDataset::log_features() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(kGeneFeatures + kChromFeatures));
  out.leftCols(kGeneFeatures) = gene_counts().array().log1p().matrix();
  out.rightCols(kChromFeatures) = (chrom_rates() * ScalingParams::kRatePrescale).array().log1p().matrix();
  return out;
}

CohortDataset scale_features(std::vector<CohortProfile> cohorts) {
  if (cohorts.size() < 2) throw InputError("cannot standardize one sample");
  std::set<std::string> seen;
  for (const auto& c : cohorts) {
    if (!seen.insert(c.name).second) throw InputError("duplicate cohort name: " + c.name);
  }

  CohortDataset ds;
  ds.cohorts = std::move(cohorts);
  const Eigen::MatrixXd gene = ds.gene_counts().array().log1p().matrix();
  const Eigen::MatrixXd chrom = (ds.chrom_rates() * ScalingParams::kRatePrescale).array().log1p().matrix();
  ds.scaled_gene = standardize(gene, ds.scaling.gene);
  ds.scaled_chrom = standardize(chrom, ds.scaling.chrom);
  return ds;
}

std::vector<std::string> gene_feature_names() {
  std::vector<std::string> names;
  names.reserve(kGeneFeatures);
  for (std::size_t i = 0; i < kTopGenes; ++i) {
    const std::string rank = (i + 1 < 10 ? "rank0" : "rank") + std::to_string(i + 1);
    for (std::size_t j = 0; j < kSubstitutionCount; ++j) {
      names.push_back(rank + "|" + std::string(to_string(substitution_at(j))));
    }
  }
  return names;
}

std::vector<std::string> chrom_feature_names() {
  std::vector<std::string> names;
  names.reserve(kChromFeatures);
  for (std::size_t c = 0; c < kChromosomeCount; ++c) {
    for (std::size_t j = 0; j < kSubstitutionCount; ++j) {
      names.push_back("chr" + ChromosomeId(c).name() + "|" + std::string(to_string(substitution_at(j))));
    }
  }
  return names;
}

}  // namespace contab

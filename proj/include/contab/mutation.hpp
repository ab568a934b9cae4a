#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace contab {

/// The 12 single-nucleotide substitutions, alphabetical by reference then
/// alternate allele. Flattened feature vectors index by this order.
enum class Substitution : std::uint8_t { AC, AG, AT, CA, CG, CT, GA, GC, GT, TA, TC, TG };

inline constexpr std::size_t kSubstitutionCount = 12;

std::string_view to_string(Substitution s);
constexpr std::size_t index_of(Substitution s) { return static_cast<std::size_t>(s); }
Substitution substitution_at(std::size_t index);

/// Returns nullopt unless both alleles are single bases in {A,C,G,T} and differ.
/// Lowercase bases are accepted.
std::optional<Substitution> substitution_from_alleles(std::string_view ref, std::string_view alt);

inline constexpr std::size_t kChromosomeCount = 24;

/// One of the 24 canonical human chromosomes, 1..22, X, Y (index 0..23).
class ChromosomeId {
 public:
  constexpr explicit ChromosomeId(std::size_t index) : index_(index) {}
  constexpr std::size_t index() const { return index_; }
  std::string name() const;  // "1".."22", "X", "Y"
  /// Accepts "7", "chr7", "X", "chrX", and the numeric aliases 23 (X) and 24 (Y).
  /// Mitochondrial and non-canonical contigs yield nullopt.
  static std::optional<ChromosomeId> parse(std::string_view text);

  friend constexpr bool operator==(ChromosomeId, ChromosomeId) = default;

 private:
  std::size_t index_;
};

using ChromosomeLengths = std::array<std::uint64_t, kChromosomeCount>;

/// GRCh38 primary-assembly lengths in base pairs.
const ChromosomeLengths& grch38_lengths();

struct MutationRecord {
  std::string gene;
  ChromosomeId chromosome{0};
  Substitution substitution{Substitution::AC};
  std::string cohort;
};

}  // namespace contab

#include "contab/mutation.hpp"

#include <cctype>
#include <charconv>

namespace contab {
namespace {

constexpr std::array<std::string_view, kSubstitutionCount> kSubstitutionNames = {
    "A>C", "A>G", "A>T", "C>A", "C>G", "C>T", "G>A", "G>C", "G>T", "T>A", "T>C", "T>G"};

int base_index(std::string_view allele) {
  if (allele.size() != 1) return -1;
  switch (std::toupper(static_cast<unsigned char>(allele[0]))) {
    case 'A': return 0;
    case 'C': return 1;
    case 'G': return 2;
    case 'T': return 3;
    default: return -1;
  }
}

}  // namespace

std::string_view to_string(Substitution s) { return kSubstitutionNames[index_of(s)]; }

Substitution substitution_at(std::size_t index) { return static_cast<Substitution>(index); }

std::optional<Substitution> substitution_from_alleles(std::string_view ref, std::string_view alt) {
  const int r = base_index(ref);
  const int a = base_index(alt);
  if (r < 0 || a < 0 || r == a) return std::nullopt;
  // Three alternates per reference, skipping the reference itself.
  const int slot = a < r ? a : a - 1;
  return static_cast<Substitution>(r * 3 + slot);
}

std::string ChromosomeId::name() const {
  if (index_ == 22) return "X";
  if (index_ == 23) return "Y";
  return std::to_string(index_ + 1);
}

std::optional<ChromosomeId> ChromosomeId::parse(std::string_view text) {
  if (text.size() > 3 && (text.substr(0, 3) == "chr" || text.substr(0, 3) == "CHR")) text.remove_prefix(3);
  if (text == "X" || text == "x") return ChromosomeId(22);
  if (text == "Y" || text == "y") return ChromosomeId(23);
  unsigned value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) return std::nullopt;
  if (value >= 1 && value <= 24) return ChromosomeId(value - 1);
  return std::nullopt;
}

const ChromosomeLengths& grch38_lengths() {
  static const ChromosomeLengths lengths = {
      248956422, 242193529, 198295559, 190214555, 181538259, 170805979, 159345973, 145138636,
      138394717, 133797422, 135086622, 133275309, 114364328, 107043718, 101991189, 90338345,
      83257441,  80373285,  58617616,  64444167,  46709983,  50818468,  156040895, 57227415};
  return lengths;
}

}  // namespace contab

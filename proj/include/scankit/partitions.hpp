#pragma once

// Counting and enumeration of addressing patterns that are distinct up to
// translation. A pattern of k sites inside an m x n sub-array is stored by
// its canonical representative, the translate touching row 0 and column 0.
// The closed-form count uses inclusion-exclusion over the row/column
// anchoring criterion; the enumeration walks k-subsets in lexicographic
// order so catalog indices are stable across runs.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace scankit::partitions {

struct Site {
  int row = 0;
  int col = 0;
  auto operator<=>(const Site&) const = default;
};

struct Offset {
  int row = 0;
  int col = 0;
  auto operator<=>(const Offset&) const = default;
};

/// A set of target sites. Sites are kept sorted and unique; patterns are
/// never empty.
struct AddressPattern {
  std::vector<Site> sites;

  static AddressPattern from(std::vector<Site> s) {
    if (s.empty()) throw std::domain_error("pattern must be non-empty");
    std::sort(s.begin(), s.end());
    for (std::size_t i = 1; i < s.size(); ++i)
      if (s[i] == s[i - 1]) throw std::domain_error("pattern has duplicate sites");
    return AddressPattern{std::move(s)};
  }

  int size() const { return static_cast<int>(sites.size()); }

  Site min_corner() const {
    Site c{sites.front().row, sites.front().col};
    for (const auto& s : sites) {
      if (s.row < c.row) c.row = s.row;
      if (s.col < c.col) c.col = s.col;
    }
    return c;
  }

  Site max_corner() const {
    Site c{sites.front().row, sites.front().col};
    for (const auto& s : sites) {
      if (s.row > c.row) c.row = s.row;
      if (s.col > c.col) c.col = s.col;
    }
    return c;
  }

  bool is_canonical() const {
    const Site c = min_corner();
    return c.row == 0 && c.col == 0;
  }

  AddressPattern translated(Offset by) const {
    AddressPattern p = *this;
    for (auto& s : p.sites) {
      s.row += by.row;
      s.col += by.col;
    }
    return p;
  }

  std::string to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < sites.size(); ++i) {
      if (i) os << ' ';
      os << '(' << sites[i].row << ',' << sites[i].col << ')';
    }
    return os.str();
  }

  auto operator<=>(const AddressPattern&) const = default;
};

/// Shifts a pattern so its bounding box touches row 0 and column 0.
/// Idempotent; the returned offset restores the original placement.
inline std::pair<AddressPattern, Offset> canonicalize(const AddressPattern& p) {
  if (p.sites.empty()) throw std::domain_error("pattern must be non-empty");
  const Site c = p.min_corner();
  return {p.translated({-c.row, -c.col}), Offset{c.row, c.col}};
}

/// Exact binomial coefficient; returns 0 for k > n. Throws on uint64
/// overflow (not reachable for n <= 64).
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  unsigned __int128 result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
    if (result > UINT64_MAX) throw std::overflow_error("binomial overflow");
  }
  return static_cast<std::uint64_t>(result);
}

namespace detail {
inline void check_grid(int m, int n, int k) {
  if (m < 1 || n < 1) throw std::domain_error("grid dimensions must be >= 1");
  if (k < 1 || std::int64_t(k) > std::int64_t(m) * n)
    throw std::domain_error("k must be in [1, m*n]");
}
}  // namespace detail

/// Number of translation-distinct k-site patterns in an m x n sub-array:
/// C(mn,k) - C((m-1)n,k) - C(m(n-1),k) + C((m-1)(n-1),k).
inline std::uint64_t partition_count(int m, int n, int k) {
  detail::check_grid(m, n, k);
  const std::uint64_t mm = m, nn = n, kk = k;
  return binomial(mm * nn, kk) - binomial((mm - 1) * nn, kk) -
         binomial(mm * (nn - 1), kk) + binomial((mm - 1) * (nn - 1), kk);
}

/// Patches needed to cover every pattern of up to k_max simultaneous sites.
inline std::uint64_t partition_total(int m, int n, int k_max) {
  detail::check_grid(m, n, k_max);
  std::uint64_t total = 0;
  for (int k = 1; k <= k_max; ++k) total += partition_count(m, n, k);
  return total;
}

/// All canonical k-site patterns in an m x n sub-array, in lexicographic
/// order of the sorted site list (row-major cell indices). Cost is
/// C(mn,k), intended for the small sub-arrays used in practice.
inline std::vector<AddressPattern> enumerate_canonical_patterns(int m, int n, int k) {
  detail::check_grid(m, n, k);
  const int cells = m * n;
  std::vector<AddressPattern> out;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    bool row0 = false, col0 = false;
    for (int i : idx) {
      if (i / n == 0) row0 = true;
      if (i % n == 0) col0 = true;
    }
    if (row0 && col0) {
      std::vector<Site> sites(k);
      for (int i = 0; i < k; ++i) sites[i] = Site{idx[i] / n, idx[i] % n};
      out.push_back(AddressPattern{std::move(sites)});
    }
    // next combination
    int pos = k - 1;
    while (pos >= 0 && idx[pos] == cells - k + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int i = pos + 1; i < k; ++i) idx[i] = idx[i - 1] + 1;
  }
  return out;
}

/// Thrown when a catalog would not fit on the available SLM partitions.
class capacity_error : public std::runtime_error {
 public:
  capacity_error(std::uint64_t required, std::uint64_t available)
      : std::runtime_error("catalog needs " + std::to_string(required) +
                           " partitions but only " + std::to_string(available) +
                           " are available"),
        required(required),
        available(available) {}
  std::uint64_t required;
  std::uint64_t available;
};

/// Canonical pattern -> SLM patch index, for every pattern of up to k_max
/// sites in a sub_m x sub_n sub-array. Indices are dense and ordered by
/// (k, site list).
struct PatchCatalog {
  int sub_m = 0;
  int sub_n = 0;
  int k_max = 0;
  std::map<AddressPattern, int> entries;

  std::size_t size() const { return entries.size(); }

  /// Patch index for a canonical pattern, or -1 if absent.
  int find(const AddressPattern& canonical) const {
    auto it = entries.find(canonical);
    return it == entries.end() ? -1 : it->second;
  }
};

inline PatchCatalog build_catalog(int m, int n, int k_max,
                                  std::uint64_t available_partitions = UINT64_MAX) {
  if (available_partitions < 1) throw std::domain_error("available_partitions must be >= 1");
  const std::uint64_t required = partition_total(m, n, k_max);
  if (required > available_partitions) throw capacity_error(required, available_partitions);
  PatchCatalog cat{m, n, k_max, {}};
  int index = 0;
  for (int k = 1; k <= k_max; ++k)
    for (auto& p : enumerate_canonical_patterns(m, n, k))
      cat.entries.emplace(std::move(p), index++);
  return cat;
}

// Catalog text format: one header line "m n k_max count", then one line per
// entry "index; k; (r,c) (r,c) ...". Writing then reading reproduces the
// document byte for byte.

inline void write_catalog(std::ostream& os, const PatchCatalog& cat) {
  os << cat.sub_m << ' ' << cat.sub_n << ' ' << cat.k_max << ' ' << cat.size() << '\n';
  std::vector<const AddressPattern*> by_index(cat.size());
  for (const auto& [pattern, index] : cat.entries) by_index[index] = &pattern;
  for (std::size_t i = 0; i < by_index.size(); ++i)
    os << i << "; " << by_index[i]->size() << "; " << by_index[i]->to_string() << '\n';
}

namespace detail {
inline std::vector<Site> parse_site_list(std::istream& is) {
  std::vector<Site> sites;
  char ch;
  while (is >> ch) {
    if (ch != '(') throw std::runtime_error("expected '(' in site list");
    Site s;
    char comma, close;
    if (!(is >> s.row >> comma >> s.col >> close) || comma != ',' || close != ')')
      throw std::runtime_error("malformed site");
    sites.push_back(s);
  }
  return sites;
}
}  // namespace detail

inline PatchCatalog read_catalog(std::istream& is) {
  PatchCatalog cat;
  std::size_t count = 0;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("catalog: missing header");
  {
    std::istringstream hs(line);
    if (!(hs >> cat.sub_m >> cat.sub_n >> cat.k_max >> count))
      throw std::runtime_error("catalog: malformed header");
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(is, line)) throw std::runtime_error("catalog: truncated");
    std::istringstream ls(line);
    std::size_t index = 0;
    int k = 0;
    char sep1, sep2;
    if (!(ls >> index >> sep1 >> k >> sep2) || sep1 != ';' || sep2 != ';')
      throw std::runtime_error("catalog: malformed entry on line " + std::to_string(i + 2));
    if (index != i) throw std::runtime_error("catalog: indices must be dense and ordered");
    auto pattern = AddressPattern::from(detail::parse_site_list(ls));
    if (pattern.size() != k || k > cat.k_max)
      throw std::runtime_error("catalog: inconsistent k on line " + std::to_string(i + 2));
    if (!pattern.is_canonical())
      throw std::runtime_error("catalog: non-canonical pattern on line " + std::to_string(i + 2));
    cat.entries.emplace(std::move(pattern), static_cast<int>(index));
  }
  return cat;
}

}  // namespace scankit::partitions

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evsvm/errors.hpp"

namespace evsvm {

// Numeric tolerances shared across the belief machinery.
inline constexpr double kUnitSumTol = 1e-9;        // mass must sum to 1 within this
inline constexpr double kExactTol = 1e-12;         // drift threshold for renormalization
inline constexpr double kTotalConflictTol = 1e-12; // conflict >= 1 - this is total
inline constexpr double kNegativeResidue = -1e-15; // rounding residue clamped to 0

/// Subset of a frame encoded as a bitmask: bit i stands for the i-th class.
struct FocalSet {
  std::uint32_t mask = 0;

  constexpr std::size_t cardinality() const noexcept {
    return static_cast<std::size_t>(std::popcount(mask));
  }
  constexpr bool empty() const noexcept { return mask == 0; }
  constexpr bool contains(std::size_t i) const noexcept {
    return (mask >> i) & 1u;
  }
  constexpr bool subset_of(FocalSet other) const noexcept {
    return (mask & ~other.mask) == 0;
  }
  constexpr bool intersects(FocalSet other) const noexcept {
    return (mask & other.mask) != 0;
  }

  static constexpr FocalSet singleton(std::size_t i) noexcept {
    return FocalSet{std::uint32_t{1} << i};
  }

  friend constexpr bool operator==(FocalSet a, FocalSet b) noexcept = default;
};

/// Ordered list of exclusive, exhaustive class labels. The order is fixed at
/// construction and defines the bitmask encoding of subsets.
class Frame {
 public:
  static constexpr std::size_t kMaxClasses = 16;

  explicit Frame(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty() || labels_.size() > kMaxClasses)
      throw std::invalid_argument("Frame: class count must be in [1, 16]");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i].empty())
        throw std::invalid_argument("Frame: empty class label");
      if (labels_[i].find_first_of(", \t\r\n{}") != std::string::npos)
        throw std::invalid_argument("Frame: label '" + labels_[i] +
                                    "' contains a reserved character");
      for (std::size_t j = i + 1; j < labels_.size(); ++j)
        if (labels_[i] == labels_[j])
          throw std::invalid_argument("Frame: duplicate label '" + labels_[i] +
                                      "'");
    }
  }

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(std::size_t i) const {
    if (i >= labels_.size()) throw std::invalid_argument("Frame: class index out of range");
    return labels_[i];
  }

  std::optional<std::size_t> index_of(std::string_view name) const noexcept {
    for (std::size_t i = 0; i < labels_.size(); ++i)
      if (labels_[i] == name) return i;
    return std::nullopt;
  }

  /// Number of subsets, 2^n.
  std::size_t subset_count() const noexcept {
    return std::size_t{1} << labels_.size();
  }

  FocalSet full_set() const noexcept {
    return FocalSet{static_cast<std::uint32_t>(subset_count() - 1)};
  }

  FocalSet complement(FocalSet x) const {
    check_subset(x);
    return FocalSet{full_set().mask & ~x.mask};
  }

  bool valid_subset(FocalSet x) const noexcept {
    return x.mask < subset_count();
  }
  void check_subset(FocalSet x) const {
    if (!valid_subset(x))
      throw std::invalid_argument("FocalSet mask does not fit the frame");
  }

  /// Renders a subset as "{a,b}"; the empty set as "{}".
  std::string set_to_string(FocalSet x) const {
    check_subset(x);
    std::string out = "{";
    bool first = true;
    for (std::size_t i = 0; i < size(); ++i) {
      if (!x.contains(i)) continue;
      if (!first) out += ',';
      out += labels_[i];
      first = false;
    }
    out += '}';
    return out;
  }

  friend bool operator==(const Frame& a, const Frame& b) = default;

 private:
  std::vector<std::string> labels_;
};

/// Allocation of unit belief over the subsets of a frame, stored densely and
/// indexed by subset mask. Immutable after construction; construction does not
/// validate (see validate_mass).
class MassFunction {
 public:
  MassFunction(Frame frame, std::vector<double> masses)
      : frame_(std::move(frame)), m_(std::move(masses)) {
    if (m_.size() != frame_.subset_count())
      throw std::invalid_argument(
          "MassFunction: dense mass vector must have 2^n entries");
  }

  MassFunction(Frame frame,
               std::initializer_list<std::pair<FocalSet, double>> focal)
      : frame_(std::move(frame)), m_(frame_.subset_count(), 0.0) {
    for (const auto& [set, value] : focal) {
      frame_.check_subset(set);
      m_[set.mask] += value;
    }
  }

  static MassFunction vacuous(Frame frame) {
    std::vector<double> m(frame.subset_count(), 0.0);
    m.back() = 1.0;
    return MassFunction(std::move(frame), std::move(m));
  }

  const Frame& frame() const noexcept { return frame_; }
  std::span<const double> masses() const noexcept { return m_; }

  double at(FocalSet x) const {
    frame_.check_subset(x);
    return m_[x.mask];
  }
  double conflict_mass() const noexcept { return m_[0]; }

 private:
  Frame frame_;
  std::vector<double> m_;
};

enum class World { open, closed };

struct MassValidity {
  bool ok = true;
  std::string violation;  // names the first violated constraint; empty if ok
};

/// Checks non-negativity, unit sum, and the world-appropriate empty-set
/// constraint, in that order.
inline MassValidity validate_mass(const MassFunction& m, World world) {
  const auto& frame = m.frame();
  double sum = 0.0;
  for (std::uint32_t x = 0; x < m.masses().size(); ++x) {
    const double v = m.masses()[x];
    if (!(v >= 0.0)) {
      std::ostringstream os;
      os << "negative mass m(" << frame.set_to_string(FocalSet{x})
         << ") = " << v;
      return {false, os.str()};
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kUnitSumTol) {
    std::ostringstream os;
    os << "mass total " << sum << " is not 1";
    return {false, os.str()};
  }
  if (world == World::closed && m.conflict_mass() > 0.0)
    return {false, "closed world forbids mass on the empty set"};
  return {};
}

/// Credibility: total mass committed to non-empty subsets of X.
inline double bel(const MassFunction& m, FocalSet x) {
  m.frame().check_subset(x);
  double sum = 0.0;
  // enumerate non-empty submasks of x
  for (std::uint32_t sub = x.mask; sub != 0; sub = (sub - 1) & x.mask)
    sum += m.masses()[sub];
  return sum;
}

/// Plausibility: total mass of subsets intersecting X.
inline double pl(const MassFunction& m, FocalSet x) {
  m.frame().check_subset(x);
  double sum = 0.0;
  for (std::uint32_t y = 1; y < m.masses().size(); ++y)
    if (y & x.mask) sum += m.masses()[y];
  return sum;
}

/// Pignistic probability over the singletons: each focal mass is split evenly
/// over its members and renormalized by 1 - m(empty).
inline std::vector<double> betp(const MassFunction& m) {
  const double open = 1.0 - m.conflict_mass();
  if (open <= kTotalConflictTol)
    throw numeric_error("pignistic transform undefined: all mass on the empty set");
  std::vector<double> out(m.frame().size(), 0.0);
  for (std::uint32_t y = 1; y < m.masses().size(); ++y) {
    const double v = m.masses()[y];
    if (v == 0.0) continue;
    const double share = v / (open * std::popcount(y));
    for (std::size_t i = 0; i < out.size(); ++i)
      if ((y >> i) & 1u) out[i] += share;
  }
  return out;
}

namespace detail {

// Clamp tiny negative rounding residue, then renormalize if the total drifted.
inline void normalize_residue(std::vector<double>& m) {
  double sum = 0.0;
  for (double& v : m) {
    if (v < 0.0 && v > kNegativeResidue) v = 0.0;
    sum += v;
  }
  if (sum > 0.0 && std::abs(sum - 1.0) > kExactTol)
    for (double& v : m) v /= sum;
}

inline void check_same_frame(const MassFunction& a, const MassFunction& b) {
  if (!(a.frame() == b.frame()))
    throw std::invalid_argument("mass functions are defined on different frames");
}

}  // namespace detail

/// Unnormalized conjunctive combination of two sources; mass may land on the
/// empty set (conflict).
inline MassFunction conjunctive_combine(const MassFunction& a,
                                        const MassFunction& b) {
  detail::check_same_frame(a, b);
  const std::size_t n = a.masses().size();
  std::vector<double> out(n, 0.0);
  for (std::uint32_t x = 0; x < n; ++x) {
    const double mx = a.masses()[x];
    if (mx == 0.0) continue;
    for (std::uint32_t y = 0; y < n; ++y) out[x & y] += mx * b.masses()[y];
  }
  detail::normalize_residue(out);
  return MassFunction(a.frame(), std::move(out));
}

/// s-ary conjunctive rule, computed as a left fold of the binary rule
/// (the rule is associative and commutative).
inline MassFunction conjunctive_combine(std::span<const MassFunction> sources) {
  if (sources.empty())
    throw std::invalid_argument("conjunctive_combine: empty source list");
  MassFunction acc = sources.front();
  for (std::size_t j = 1; j < sources.size(); ++j)
    acc = conjunctive_combine(acc, sources[j]);
  return acc;
}

struct DempsterResult {
  MassFunction mass;
  double conflict;  // mass the conjunctive step assigned to the empty set
};

/// Normalized conjunctive rule: combines, measures the conflict, and
/// redistributes it proportionally. Total conflict is an error.
inline DempsterResult dempster_combine(std::span<const MassFunction> sources) {
  MassFunction conj = conjunctive_combine(sources);
  const double conflict = conj.conflict_mass();
  if (conflict >= 1.0 - kTotalConflictTol)
    throw numeric_error("Dempster combination undefined: sources are in total conflict");
  std::vector<double> out(conj.masses().begin(), conj.masses().end());
  out[0] = 0.0;
  const double scale = 1.0 / (1.0 - conflict);
  for (double& v : out) v *= scale;
  detail::normalize_residue(out);
  return {MassFunction(conj.frame(), std::move(out)), conflict};
}

inline DempsterResult dempster_combine(const MassFunction& a,
                                       const MassFunction& b) {
  const MassFunction pair[] = {a, b};
  return dempster_combine(std::span<const MassFunction>(pair));
}

/// Debug rendering: focal sets only, "{a}: 0.6, {a,b}: 0.4". Not a stability
/// contract.
inline std::string to_debug_string(const MassFunction& m) {
  std::ostringstream os;
  bool first = true;
  for (std::uint32_t x = 0; x < m.masses().size(); ++x) {
    if (m.masses()[x] == 0.0) continue;
    if (!first) os << ", ";
    os << m.frame().set_to_string(FocalSet{x}) << ": " << m.masses()[x];
    first = false;
  }
  if (first) os << "(null mass)";
  return os.str();
}

}  // namespace evsvm

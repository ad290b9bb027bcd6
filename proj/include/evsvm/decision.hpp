#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "evsvm/belief.hpp"
#include "evsvm/errors.hpp"

namespace evsvm {

/// Result of a decision rule: a single class, a union of two or more classes,
/// or a refusal to assign any learned class.
struct DecisionOutcome {
  enum class Kind { singleton, set_union, rejected };

  Kind kind = Kind::rejected;
  FocalSet set;  // the class bit (singleton) or the union mask; empty otherwise

  static DecisionOutcome singleton(std::size_t class_index) {
    return {Kind::singleton, FocalSet::singleton(class_index)};
  }
  static DecisionOutcome union_of(FocalSet s) {
    if (s.cardinality() < 2)
      throw std::invalid_argument("union outcome needs at least two classes");
    return {Kind::set_union, s};
  }
  static DecisionOutcome rejected() { return {}; }

  bool is_rejected() const noexcept { return kind == Kind::rejected; }
  bool is_singleton() const noexcept { return kind == Kind::singleton; }
  bool is_union() const noexcept { return kind == Kind::set_union; }

  std::size_t class_index() const {
    if (kind != Kind::singleton)
      throw std::logic_error("class_index on a non-singleton outcome");
    return static_cast<std::size_t>(std::countr_zero(set.mask));
  }

  friend bool operator==(const DecisionOutcome&, const DecisionOutcome&) = default;
};

/// Class with the maximal pignistic probability; ties go to the lowest index.
inline std::size_t decide_pignistic(const MassFunction& m) {
  const std::vector<double> p = betp(m);
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i)
    if (p[i] > p[best]) best = i;
  return best;
}

/// Maximum of credibility with reject: the best singleton is kept only when
/// it is at least as credible as the union of the other classes.
inline DecisionOutcome decide_maxbel_reject(const MassFunction& m) {
  const Frame& frame = m.frame();
  std::size_t best = 0;
  double best_bel = bel(m, FocalSet::singleton(0));
  for (std::size_t i = 1; i < frame.size(); ++i) {
    const double b = bel(m, FocalSet::singleton(i));
    if (b > best_bel) {
      best = i;
      best_bel = b;
    }
  }
  const double against = bel(m, frame.complement(FocalSet::singleton(best)));
  return best_bel >= against ? DecisionOutcome::singleton(best)
                             : DecisionOutcome::rejected();
}

/// Cardinality-penalized weights over the non-empty subsets:
/// weight(X) = K * lambda_X / |X|^r, normalized to sum 1.
struct AppriouWeights {
  double r = 0.6;
  std::vector<double> lambda_x;  // per-mask subset weight, default 1
  std::vector<double> weights;   // per-mask, index 0 unused (0)
};

inline AppriouWeights build_appriou_weights(const Frame& frame, double r,
                                            std::vector<double> lambda_x = {}) {
  if (!(r >= 0.0 && r <= 1.0))
    throw std::invalid_argument("imprecision parameter r must be in [0, 1]");
  const std::size_t count = frame.subset_count();
  if (lambda_x.empty()) lambda_x.assign(count, 1.0);
  if (lambda_x.size() != count)
    throw std::invalid_argument("lambda_x must cover every subset");

  AppriouWeights out;
  out.r = r;
  out.lambda_x = std::move(lambda_x);
  out.weights.assign(count, 0.0);
  double sum = 0.0;
  for (std::uint32_t x = 1; x < count; ++x) {
    const double card = static_cast<double>(std::popcount(x));
    out.weights[x] = out.lambda_x[x] / std::pow(card, r);
    sum += out.weights[x];
  }
  if (!(sum > 0.0))
    throw std::invalid_argument("appriou weights: normalization impossible");
  for (double& w : out.weights) w /= sum;
  return out;
}

/// Plausibility-weighted argmax over all non-empty subsets. Ties break toward
/// the smaller cardinality, then the lower mask.
inline DecisionOutcome decide_appriou(const MassFunction& m,
                                      const AppriouWeights& w) {
  const Frame& frame = m.frame();
  if (w.weights.size() != frame.subset_count())
    throw std::invalid_argument("appriou weights built for a different frame");
  double best_score = -1.0;
  std::uint32_t best = 1;
  for (std::size_t card = 1; card <= frame.size(); ++card)
    for (std::uint32_t x = 1; x < frame.subset_count(); ++x) {
      if (static_cast<std::size_t>(std::popcount(x)) != card) continue;
      const double score = w.weights[x] * pl(m, FocalSet{x});
      if (score > best_score) {
        best_score = score;
        best = x;
      }
    }
  const FocalSet pick{best};
  return pick.cardinality() == 1
             ? DecisionOutcome::singleton(
                   static_cast<std::size_t>(std::countr_zero(pick.mask)))
             : DecisionOutcome::union_of(pick);
}

inline DecisionOutcome decide_appriou(const MassFunction& m, double r) {
  return decide_appriou(m, build_appriou_weights(m.frame(), r));
}

enum class ProcessOrder { one_two, two_one };

/// Composed decision processes. (1-2): reject first, then decide on subsets.
/// (2-1): decide on subsets first, then apply the reject test only to the
/// patterns that landed on unions.
inline DecisionOutcome decide_process(const MassFunction& m,
                                      const AppriouWeights& w,
                                      ProcessOrder order) {
  if (order == ProcessOrder::one_two) {
    DecisionOutcome gate = decide_maxbel_reject(m);
    if (gate.is_rejected()) return gate;
    return decide_appriou(m, w);
  }
  DecisionOutcome first = decide_appriou(m, w);
  if (first.is_singleton()) return first;
  return decide_maxbel_reject(m);
}

inline DecisionOutcome decide_process(const MassFunction& m, double r,
                                      ProcessOrder order) {
  return decide_process(m, build_appriou_weights(m.frame(), r), order);
}

}  // namespace evsvm

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "evsvm/belief.hpp"
#include "evsvm/errors.hpp"
#include "evsvm/matrix.hpp"
#include "evsvm/svm.hpp"

namespace evsvm {

enum class Strategy { one_vs_one, one_vs_rest };

inline std::string to_string(Strategy s) {
  return s == Strategy::one_vs_one ? "ovo" : "ovr";
}
inline Strategy parse_strategy(std::string_view text) {
  if (text == "ovo") return Strategy::one_vs_one;
  if (text == "ovr") return Strategy::one_vs_rest;
  throw data_error("unknown strategy '" + std::string(text) +
                   "' (expected ovo or ovr)");
}

/// How the exponential scales are estimated: dividing the signed sums by the
/// total sample count, or by the count of same-signed values only.
enum class LambdaMode { total, conditional };

inline std::string to_string(LambdaMode m) {
  return m == LambdaMode::total ? "total" : "conditional";
}
inline LambdaMode parse_lambda_mode(std::string_view text) {
  if (text == "total") return LambdaMode::total;
  if (text == "conditional") return LambdaMode::conditional;
  throw data_error("unknown lambda mode '" + std::string(text) +
                   "' (expected total or conditional)");
}

/// Per-classifier calibration: exponential scales of the decision values on
/// each side of the hyperplane, and a discounting factor from the binary
/// training accuracy.
struct Calibration {
  double lambda_pos = 1.0;   // > 0
  double lambda_neg = -1.0;  // < 0
  double discount = 0.5;     // in [0.5, 1 - 1e-6]
  bool fallback_pos = false; // positive side was empty, scale synthesized
  bool fallback_neg = false;
};

inline constexpr double kMaxDiscount = 1.0 - 1e-6;
inline constexpr double kMinDiscount = 0.5;

/// Estimates the calibration from the decision values of one binary task.
/// Values with f >= 0 count as the positive side. A side with no values (or a
/// zero sum) gets a fallback scale of 1e-3 * max|f|.
inline Calibration calibrate_from_values(std::span<const double> decisions,
                                         std::span<const double> labels,
                                         LambdaMode mode = LambdaMode::total) {
  if (decisions.empty())
    throw std::invalid_argument("calibrate: no decision values");
  if (labels.size() != decisions.size())
    throw std::invalid_argument("calibrate: label count mismatch");

  double pos_sum = 0.0, neg_sum = 0.0, max_abs = 0.0;
  std::size_t pos_count = 0, neg_count = 0, correct = 0;
  for (std::size_t t = 0; t < decisions.size(); ++t) {
    const double f = decisions[t];
    if (!std::isfinite(f))
      throw std::invalid_argument("calibrate: non-finite decision value");
    if (f >= 0.0) {
      pos_sum += f;
      ++pos_count;
    } else {
      neg_sum += f;
      ++neg_count;
    }
    if ((f >= 0.0 ? 1.0 : -1.0) == labels[t]) ++correct;
    max_abs = std::max(max_abs, std::abs(f));
  }

  const double l = static_cast<double>(decisions.size());
  const double floor_scale =
      std::max(1e-3 * max_abs, std::numeric_limits<double>::epsilon());

  Calibration cal;
  if (pos_count == 0 || pos_sum <= 0.0) {
    cal.fallback_pos = true;
    cal.lambda_pos = floor_scale;
  } else {
    cal.lambda_pos =
        pos_sum / (mode == LambdaMode::total ? l : static_cast<double>(pos_count));
  }
  if (neg_count == 0 || neg_sum >= 0.0) {
    cal.fallback_neg = true;
    cal.lambda_neg = -floor_scale;
  } else {
    cal.lambda_neg =
        neg_sum / (mode == LambdaMode::total ? l : static_cast<double>(neg_count));
  }

  const double accuracy = static_cast<double>(correct) / l;
  cal.discount = std::min(kMaxDiscount, std::max(kMinDiscount, accuracy));
  return cal;
}

/// What a binary classifier discriminates: class `positive` against class
/// `negative` (pairwise), or against the rest of the frame when `negative`
/// is empty.
struct BinaryScope {
  std::size_t positive = 0;
  std::optional<std::size_t> negative;  // nullopt: one-versus-rest

  bool is_pair() const noexcept { return negative.has_value(); }
};

/// Mass function induced by one decision value. The positive side supports
/// {w_pos}; the negative side supports {w_neg} (pairwise) or the complement
/// of {w_pos} (rest). Belief follows the exponential CDF of the decision
/// value, discounted by the classifier's training accuracy.
inline MassFunction bba_from_decision(double f, const Calibration& cal,
                                      const BinaryScope& scope,
                                      const Frame& frame) {
  if (!std::isfinite(f))
    throw std::invalid_argument("bba_from_decision: non-finite decision value");
  if (scope.positive >= frame.size())
    throw std::invalid_argument("bba_from_decision: scope outside the frame");
  if (scope.is_pair() &&
      (*scope.negative >= frame.size() || *scope.negative == scope.positive))
    throw std::invalid_argument("bba_from_decision: bad pairwise scope");
  if (!scope.is_pair() && frame.size() < 2)
    throw std::invalid_argument(
        "bba_from_decision: one-versus-rest needs at least two classes");
  if (!(cal.lambda_pos > 0.0) || !(cal.lambda_neg < 0.0))
    throw std::invalid_argument("bba_from_decision: invalid calibration");

  const FocalSet pos = FocalSet::singleton(scope.positive);
  const FocalSet neg = scope.is_pair() ? FocalSet::singleton(*scope.negative)
                                       : frame.complement(pos);

  const double alpha = cal.discount;
  const double decay =
      f >= 0.0 ? std::exp(-f / cal.lambda_pos) : std::exp(-f / cal.lambda_neg);
  const double small = alpha * (0.5 * decay);
  const double large = alpha - small;

  std::vector<double> m(frame.subset_count(), 0.0);
  m[pos.mask] = f >= 0.0 ? large : small;
  m[neg.mask] = f >= 0.0 ? small : large;
  m[frame.full_set().mask] += 1.0 - alpha;
  return MassFunction(frame, std::move(m));
}

struct CalibratedClassifier {
  BinaryScope scope;
  SvmModel model;
  Calibration cal;
  bool converged = true;
};

/// Bank of calibrated binary SVMs over a shared frame.
struct EvidentialModel {
  Frame frame;
  Strategy strategy = Strategy::one_vs_one;
  KernelSpec kernel;
  double C = 1.0;
  std::size_t dim = 0;
  std::vector<CalibratedClassifier> classifiers;
};

struct FusionResult {
  MassFunction mass;
  double conflict;  // empty-set mass of the unnormalized combination
};

/// Evaluates every binary decision function at x, converts each to a mass
/// function, and combines them with the normalized conjunctive rule.
inline FusionResult fuse_pattern(std::span<const double> x,
                                 const EvidentialModel& model) {
  if (model.classifiers.empty())
    throw std::invalid_argument("fuse_pattern: model has no classifiers");
  std::vector<MassFunction> bbas;
  bbas.reserve(model.classifiers.size());
  for (const auto& c : model.classifiers)
    bbas.push_back(bba_from_decision(decision_function(c.model, x), c.cal,
                                     c.scope, model.frame));
  auto [mass, conflict] = dempster_combine(bbas);
  return {std::move(mass), conflict};
}

struct TrainSettings {
  KernelSpec kernel = KernelSpec::rbf(1.0);
  double C = 1.0;
  double tol = 1e-3;
  LambdaMode lambda_mode = LambdaMode::total;
  TrainOptions smo;
};

namespace detail {

inline CalibratedClassifier train_calibrated(const SvmProblem& sub,
                                             const BinaryScope& scope,
                                             const TrainSettings& s) {
  TrainResult trained = train_binary(sub, s.kernel, s.smo);
  std::vector<double> decisions(sub.points.rows);
  for (std::size_t t = 0; t < sub.points.rows; ++t)
    decisions[t] = decision_function(trained.model, sub.points.row(t));
  Calibration cal = calibrate_from_values(decisions, sub.labels, s.lambda_mode);
  return {scope, std::move(trained.model), cal, trained.converged};
}

}  // namespace detail

/// Trains the one-versus-rest (n classifiers) or one-versus-one
/// (n(n-1)/2 classifiers) bank and calibrates each on its own binary
/// training set.
inline EvidentialModel train_multiclass(const Matrix& points,
                                        const std::vector<std::size_t>& classes,
                                        const Frame& frame, Strategy strategy,
                                        const TrainSettings& s = {}) {
  const std::size_t n = frame.size();
  if (n < 2)
    throw std::invalid_argument("train_multiclass: need at least two classes");
  if (points.rows != classes.size())
    throw std::invalid_argument("train_multiclass: label count mismatch");

  std::vector<std::size_t> count(n, 0);
  for (std::size_t c : classes) {
    if (c >= n)
      throw std::invalid_argument("train_multiclass: class index outside frame");
    ++count[c];
  }
  for (std::size_t i = 0; i < n; ++i)
    if (count[i] == 0)
      throw std::invalid_argument("train_multiclass: class '" + frame.label(i) +
                                  "' has no training samples");

  EvidentialModel model{frame, strategy, s.kernel, s.C, points.cols, {}};

  if (strategy == Strategy::one_vs_rest) {
    for (std::size_t i = 0; i < n; ++i) {
      SvmProblem sub;
      sub.points = points;
      sub.C = s.C;
      sub.tol = s.tol;
      sub.labels.reserve(points.rows);
      for (std::size_t t = 0; t < points.rows; ++t)
        sub.labels.push_back(classes[t] == i ? 1.0 : -1.0);
      model.classifiers.push_back(
          detail::train_calibrated(sub, BinaryScope{i, std::nullopt}, s));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        if (count[i] < 2 || count[j] < 2) {
          std::ostringstream os;
          os << "train_multiclass: pair (" << frame.label(i) << ", "
             << frame.label(j) << ") needs at least 2 samples per class; got "
             << count[i] << " and " << count[j];
          throw std::invalid_argument(os.str());
        }
        SvmProblem sub;
        sub.C = s.C;
        sub.tol = s.tol;
        for (std::size_t t = 0; t < points.rows; ++t) {
          if (classes[t] != i && classes[t] != j) continue;
          sub.points.push_row(points.row(t));
          sub.labels.push_back(classes[t] == i ? 1.0 : -1.0);
        }
        model.classifiers.push_back(
            detail::train_calibrated(sub, BinaryScope{i, j}, s));
      }
  }
  return model;
}

/// Majority vote over the pairwise decision functions; ties break toward the
/// lowest class index.
inline std::size_t vote_ovo(std::span<const double> x,
                            const EvidentialModel& model) {
  if (model.strategy != Strategy::one_vs_one)
    throw std::invalid_argument("vote_ovo: model is not one-versus-one");
  std::vector<std::size_t> votes(model.frame.size(), 0);
  for (const auto& c : model.classifiers) {
    const double f = decision_function(c.model, x);
    ++votes[f >= 0.0 ? c.scope.positive : *c.scope.negative];
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < votes.size(); ++i)
    if (votes[i] > votes[best]) best = i;
  return best;
}

/// Class of the maximal one-versus-rest decision value; ties break toward the
/// lowest class index.
inline std::size_t argmax_ovr(std::span<const double> x,
                              const EvidentialModel& model) {
  if (model.strategy != Strategy::one_vs_rest)
    throw std::invalid_argument("argmax_ovr: model is not one-versus-rest");
  std::size_t best = 0;
  double best_f = -std::numeric_limits<double>::infinity();
  for (const auto& c : model.classifiers) {
    const double f = decision_function(c.model, x);
    if (f > best_f || (f == best_f && c.scope.positive < best)) {
      best_f = f;
      best = c.scope.positive;
    }
  }
  return best;
}

}  // namespace evsvm

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <list>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "evsvm/errors.hpp"
#include "evsvm/kernel.hpp"
#include "evsvm/matrix.hpp"

namespace evsvm {

/// A binary soft-margin training problem. Labels are -1/+1.
struct SvmProblem {
  Matrix points;
  std::vector<double> labels;
  double C = 1.0;
  double tol = 1e-3;  // KKT tolerance, also the solver stopping threshold
};

/// Trained binary classifier: f(x) = sum_t dual_coefs[t] * K(x, sv_t) + bias,
/// where dual_coefs[t] = y_t * alpha_t over the support vectors (alpha_t > 0).
struct SvmModel {
  Matrix support_vectors;
  std::vector<double> dual_coefs;
  double bias = 0.0;
  KernelSpec kernel;

  std::size_t dim() const noexcept { return support_vectors.cols; }
};

inline double decision_function(const SvmModel& m, std::span<const double> x) {
  if (x.size() != m.dim())
    throw std::invalid_argument("decision_function: dimension mismatch");
  double acc = 0.0;
  for (std::size_t t = 0; t < m.support_vectors.rows; ++t)
    acc += m.dual_coefs[t] * kernel_eval(m.kernel, x, m.support_vectors.row(t));
  return acc + m.bias;
}

struct TrainOptions {
  std::size_t max_passes = 10;  // pair-update budget is max_passes * l
  std::size_t cache_budget_bytes = std::size_t{64} << 20;
  bool record_objective = false;
};

struct TrainResult {
  SvmModel model;
  std::vector<double> alphas;  // dual solution over all training points
  bool converged = false;
  std::size_t iterations = 0;
  double final_violation = 0.0;  // KKT gap at exit
  std::vector<double> objective_trace;  // dual objective, when recorded
};

namespace detail {

/// LRU cache of kernel matrix rows, bounded by a byte budget (at least two
/// rows are always kept so a fetched pair stays valid).
class KernelCache {
 public:
  KernelCache(const Matrix& pts, const KernelSpec& kernel, std::size_t budget)
      : pts_(pts), kernel_(kernel) {
    const std::size_t row_bytes = pts.rows * sizeof(double);
    max_rows_ = row_bytes == 0
                    ? 2
                    : std::max<std::size_t>(2, budget / row_bytes);
  }

  std::span<const double> row(std::size_t t) {
    auto it = index_.find(t);
    if (it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return {it->second->second.data(), pts_.rows};
    }
    if (lru_.size() >= max_rows_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    std::vector<double> r(pts_.rows);
    for (std::size_t u = 0; u < pts_.rows; ++u)
      r[u] = kernel_eval(kernel_, pts_.row(t), pts_.row(u));
    lru_.emplace_front(t, std::move(r));
    index_[t] = lru_.begin();
    return {lru_.front().second.data(), pts_.rows};
  }

 private:
  using Entry = std::pair<std::size_t, std::vector<double>>;
  const Matrix& pts_;
  KernelSpec kernel_;
  std::size_t max_rows_;
  std::list<Entry> lru_;
  std::unordered_map<std::size_t, std::list<Entry>::iterator> index_;
};

inline void check_problem(const SvmProblem& p) {
  const std::size_t l = p.points.rows;
  if (l < 2) throw std::invalid_argument("svm: need at least two training points");
  if (p.labels.size() != l)
    throw std::invalid_argument("svm: label count does not match point count");
  if (p.points.cols == 0) throw std::invalid_argument("svm: empty feature rows");
  if (!(p.C > 0.0)) throw std::invalid_argument("svm: C must be positive");
  if (!(p.tol > 0.0)) throw std::invalid_argument("svm: tol must be positive");
  bool pos = false, neg = false;
  for (double y : p.labels) {
    if (y == 1.0) pos = true;
    else if (y == -1.0) neg = true;
    else throw std::invalid_argument("svm: labels must be -1 or +1");
  }
  if (!pos || !neg)
    throw std::invalid_argument("svm: training set contains a single class");
}

}  // namespace detail

/// Sequential minimal optimization on the dual. Working pairs are chosen by
/// maximal KKT violation; each step solves the two-variable subproblem
/// analytically. Deterministic: ties go to the lowest index.
inline TrainResult train_binary(const SvmProblem& p, const KernelSpec& kernel,
                                const TrainOptions& opt = {}) {
  detail::check_problem(p);
  const std::size_t l = p.points.rows;
  const double C = p.C;
  const std::vector<double>& y = p.labels;

  detail::KernelCache cache(p.points, kernel, opt.cache_budget_bytes);
  std::vector<double> diag(l);
  for (std::size_t t = 0; t < l; ++t)
    diag[t] = kernel_eval(kernel, p.points.row(t), p.points.row(t));

  std::vector<double> alpha(l, 0.0);
  std::vector<double> grad(l, -1.0);  // gradient of the minimized dual

  TrainResult result;
  if (opt.record_objective) result.objective_trace.push_back(0.0);

  const std::size_t max_iter = std::max<std::size_t>(1, opt.max_passes) * l;
  constexpr double kTau = 1e-12;

  bool converged = false;
  double violation = std::numeric_limits<double>::infinity();
  std::size_t iter = 0;
  for (; iter < max_iter; ++iter) {
    // maximal-violating pair: i maximizes -y*grad over the "can increase"
    // set, j minimizes it over the "can decrease" set
    double up_max = -std::numeric_limits<double>::infinity();
    double low_min = std::numeric_limits<double>::infinity();
    std::ptrdiff_t i = -1, j = -1;
    for (std::size_t t = 0; t < l; ++t) {
      const double v = -y[t] * grad[t];
      const bool in_up = y[t] > 0 ? alpha[t] < C : alpha[t] > 0;
      const bool in_low = y[t] > 0 ? alpha[t] > 0 : alpha[t] < C;
      if (in_up && v > up_max) {
        up_max = v;
        i = static_cast<std::ptrdiff_t>(t);
      }
      if (in_low && v < low_min) {
        low_min = v;
        j = static_cast<std::ptrdiff_t>(t);
      }
    }
    if (i < 0 || j < 0) {
      converged = true;
      violation = 0.0;
      break;
    }
    violation = up_max - low_min;
    if (violation <= p.tol) {
      converged = true;
      break;
    }

    const auto ui = static_cast<std::size_t>(i);
    const auto uj = static_cast<std::size_t>(j);
    std::span<const double> ki = cache.row(ui);
    std::span<const double> kj = cache.row(uj);

    double quad = diag[ui] + diag[uj] - 2.0 * ki[uj];
    if (quad <= 0.0) quad = kTau;

    const double old_i = alpha[ui];
    const double old_j = alpha[uj];
    if (y[ui] != y[uj]) {
      const double delta = (-grad[ui] - grad[uj]) / quad;
      const double diff = alpha[ui] - alpha[uj];
      alpha[ui] += delta;
      alpha[uj] += delta;
      if (diff > 0) {
        if (alpha[uj] < 0) { alpha[uj] = 0; alpha[ui] = diff; }
      } else {
        if (alpha[ui] < 0) { alpha[ui] = 0; alpha[uj] = -diff; }
      }
      if (diff > 0) {
        if (alpha[ui] > C) { alpha[ui] = C; alpha[uj] = C - diff; }
      } else {
        if (alpha[uj] > C) { alpha[uj] = C; alpha[ui] = C + diff; }
      }
    } else {
      const double delta = (grad[ui] - grad[uj]) / quad;
      const double sum = alpha[ui] + alpha[uj];
      alpha[ui] -= delta;
      alpha[uj] += delta;
      if (sum > C) {
        if (alpha[ui] > C) { alpha[ui] = C; alpha[uj] = sum - C; }
      } else {
        if (alpha[uj] < 0) { alpha[uj] = 0; alpha[ui] = sum; }
      }
      if (sum > C) {
        if (alpha[uj] > C) { alpha[uj] = C; alpha[ui] = sum - C; }
      } else {
        if (alpha[ui] < 0) { alpha[ui] = 0; alpha[uj] = sum; }
      }
    }

    const double d_i = alpha[ui] - old_i;
    const double d_j = alpha[uj] - old_j;
    for (std::size_t t = 0; t < l; ++t)
      grad[t] += y[t] * (y[ui] * ki[t] * d_i + y[uj] * kj[t] * d_j);

    if (opt.record_objective) {
      double dual = 0.0;  // maximized form: sum(alpha) - 1/2 a'Qa
      for (std::size_t t = 0; t < l; ++t)
        dual -= 0.5 * alpha[t] * (grad[t] - 1.0);
      result.objective_trace.push_back(dual);
    }
  }

  // bias: average of y_t - g_t over free support vectors; otherwise the
  // midpoint of the bracket the bound vectors impose
  double bias;
  {
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < l; ++t) {
      const double g = y[t] * (grad[t] + 1.0);  // decision value without bias
      const double v = y[t] - g;
      if (alpha[t] > 0.0 && alpha[t] < C) {
        free_sum += v;
        ++free_count;
      } else if ((y[t] > 0 && alpha[t] <= 0.0) || (y[t] < 0 && alpha[t] >= C)) {
        lower = std::max(lower, v);
      } else {
        upper = std::min(upper, v);
      }
    }
    if (free_count > 0) {
      bias = free_sum / static_cast<double>(free_count);
    } else if (std::isfinite(lower) && std::isfinite(upper)) {
      bias = 0.5 * (lower + upper);
    } else {
      bias = std::isfinite(lower) ? lower : (std::isfinite(upper) ? upper : 0.0);
    }
  }

  SvmModel model;
  model.kernel = kernel;
  model.bias = bias;
  for (std::size_t t = 0; t < l; ++t) {
    if (alpha[t] > 0.0) {
      model.support_vectors.push_row(p.points.row(t));
      model.dual_coefs.push_back(y[t] * alpha[t]);
    }
  }

  result.model = std::move(model);
  result.alphas = std::move(alpha);
  result.converged = converged;
  result.iterations = iter;
  result.final_violation = converged && !std::isfinite(violation) ? 0.0 : violation;
  return result;
}

}  // namespace evsvm

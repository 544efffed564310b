#include "mdf/optsize.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "mdf/normal.hpp"

namespace mdf {

double roc_normal_shift(double a, double theta) {
  if (!(a >= 0.0 && a <= 1.0)) throw std::domain_error("roc: size must lie in [0,1]");
  if (a == 0.0) return 0.0;
  if (a == 1.0) return 1.0;
  if (theta == 0.0) return a;
  return normal_cdf(normal_quantile(a) + theta);
}

double roc_normal_shift_slope(double a, double theta) {
  if (theta == 0.0) return 1.0;
  const double z = normal_quantile(a);
  return std::exp(-theta * z - 0.5 * theta * theta);
}

RocModel::RocModel(std::vector<double> thetas) : thetas_(std::move(thetas)) {
  if (thetas_.empty()) throw std::invalid_argument("ROC model needs at least one test");
  for (double t : thetas_) {
    if (!(t >= 0.0 && std::isfinite(t))) {
      throw std::invalid_argument("ROC mean shifts must be finite and nonnegative");
    }
  }
}

double RocModel::total_power(double alpha, std::span<const double> weights) const {
  const double log_keep = std::log1p(-alpha);
  double total = 0.0;
  for (std::size_t m = 0; m < thetas_.size(); ++m) {
    total += power(m, -std::expm1(weights[m] * log_keep));
  }
  return total;
}

namespace {

// Marginal power of test m per unit of exponent weight; decreasing in w.
struct Marginal {
  const RocModel& roc;
  double log_keep;  // log(1 - alpha) < 0
  // Below this weight the size is under 1e-300. The ROC slope is unbounded
  // at size 0, so the boundary w = 0 is judged by the marginal here.
  double floor_weight;

  Marginal(const RocModel& r, double lk) : roc(r), log_keep(lk), floor_weight(1e-300 / -lk) {}

  double operator()(std::size_t m, double w) const {
    w = std::max(w, floor_weight);
    const double keep = std::exp(w * log_keep);
    const double a = -std::expm1(w * log_keep);
    return roc.slope(m, a) * (-log_keep) * keep;
  }

  // The w in [0,1] with marginal(m, w) = lambda.
  double solve(std::size_t m, double lambda) const {
    if ((*this)(m, floor_weight) <= lambda) return 0.0;
    if ((*this)(m, 1.0) >= lambda) return 1.0;
    double lo = floor_weight;
    double hi = 1.0;
    for (int it = 0; it < 400 && hi - lo > 1e-16 * hi; ++it) {
      // Geometric steps while the bracket spans orders of magnitude.
      const double mid = hi > 4.0 * lo ? std::sqrt(lo) * std::sqrt(hi) : 0.5 * (lo + hi);
      if ((*this)(m, mid) > lambda) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }
};

double kkt_residual(const Marginal& marginal, std::span<const double> w) {
  double lambda = 0.0;
  for (std::size_t m = 0; m < w.size(); ++m) lambda += w[m] * marginal(m, w[m]);
  double worst = 0.0;
  for (std::size_t m = 0; m < w.size(); ++m) {
    const double g = marginal(m, w[m]);
    const double gap = w[m] > 0.0 ? std::fabs(g - lambda) : std::max(0.0, g - lambda);
    worst = std::max(worst, gap / lambda);
  }
  return worst;
}

}  // namespace

WeightSolution optimize_weights_at_alpha(const RocModel& roc, double alpha,
                                         const OptimizerOptions& options) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("optimizer: alpha must lie in (0,1)");
  const std::size_t m_total = roc.size();
  WeightSolution sol;
  sol.alpha = alpha;
  if (m_total == 1) {
    sol.weights = {1.0};
    sol.total_power = roc.total_power(alpha, sol.weights);
    return sol;
  }

  const Marginal marginal(roc, std::log1p(-alpha));
  auto weights_at = [&](double lambda) {
    std::vector<double> w(m_total);
    for (std::size_t m = 0; m < m_total; ++m) w[m] = marginal.solve(m, lambda);
    return w;
  };
  auto sum = [](const std::vector<double>& w) {
    double s = 0.0;
    for (double x : w) s += x;
    return s;
  };

  // Multiplier bracket: at lo every weight is 1, at hi none exceeds 1/M.
  double lo = marginal(0, 1.0);
  double hi = marginal(0, 1.0 / static_cast<double>(m_total));
  for (std::size_t m = 1; m < m_total; ++m) {
    lo = std::min(lo, marginal(m, 1.0));
    hi = std::max(hi, marginal(m, 1.0 / static_cast<double>(m_total)));
  }

  std::vector<double> w = weights_at(hi);
  std::size_t it = 0;
  for (; it < options.max_iterations && hi > lo * (1.0 + 1e-15); ++it) {
    const double mid = std::sqrt(lo) * std::sqrt(hi);
    if (mid <= lo || mid >= hi) break;
    std::vector<double> trial = weights_at(mid);
    if (sum(trial) >= 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    w = std::move(trial);
  }
  const double total = sum(w);
  for (double& x : w) x /= total;

  sol.weights = std::move(w);
  sol.iterations = it;
  sol.total_power = roc.total_power(alpha, sol.weights);
  sol.kkt_residual = kkt_residual(marginal, sol.weights);
  if (!(sol.kkt_residual <= options.kkt_tolerance)) {
    throw OptimizerError("optimizer did not converge at alpha = " + std::to_string(alpha) +
                             " (KKT residual " + std::to_string(sol.kkt_residual) + ")",
                         sol);
  }
  return sol;
}

std::vector<double> isotonic_increasing(std::span<const double> values) {
  struct Block {
    double sum;
    std::size_t count;
    double mean() const { return sum / static_cast<double>(count); }
  };
  std::vector<Block> blocks;
  for (double v : values) {
    blocks.push_back({v, 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      const Block last = blocks.back();
      blocks.pop_back();
      blocks.back().sum += last.sum;
      blocks.back().count += last.count;
    }
  }
  std::vector<double> fitted;
  fitted.reserve(values.size());
  for (const Block& b : blocks) fitted.insert(fitted.end(), b.count, b.mean());
  return fitted;
}

OptimalFamily build_optimal_family(const RocModel& roc, std::span<const double> grid,
                                   const FamilyOptions& options) {
  if (grid.size() < 16) throw std::invalid_argument("optimal family: grid needs at least 16 points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0 && grid[i] < 1.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw std::invalid_argument("optimal family: grid must be strictly increasing in (0,1)");
    }
  }

  const std::size_t m_total = roc.size();
  const auto n = static_cast<std::int64_t>(grid.size());
  std::vector<WeightSolution> solutions(grid.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) if (options.parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      solutions[static_cast<std::size_t>(i)] =
          optimize_weights_at_alpha(roc, grid[static_cast<std::size_t>(i)], options.optimizer);
    } catch (...) {
#pragma omp critical(mdf_optsize_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  OptimalFamily out{SizeFamily::sidak(m_total), {grid.begin(), grid.end()}, std::move(solutions),
                    0.0};
  std::vector<std::vector<Knot>> knots(m_total);
  std::vector<double> component(grid.size());
  for (std::size_t m = 0; m < m_total; ++m) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      component[i] = -std::expm1(out.solutions[i].weights[m] * std::log1p(-grid[i]));
    }
    const std::vector<double> repaired = isotonic_increasing(component);
    if (!(repaired.front() > 0.0)) {
      throw OptimizerError("test " + std::to_string(m + 1) +
                               " receives zero size at the smallest grid point; the optimal "
                               "allocation is not a valid size function",
                           out.solutions.front());
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
      out.max_repair = std::max(out.max_repair, std::fabs(repaired[i] - component[i]));
      knots[m].push_back({grid[i], repaired[i]});
    }
  }
  if (out.max_repair > options.repair_budget) {
    throw OptimizerError("isotonic repair changed a size by " + std::to_string(out.max_repair) +
                             ", above the budget " + std::to_string(options.repair_budget) +
                             "; the ROC model is ill-conditioned for this grid",
                         out.solutions.front());
  }
  try {
    out.family = SizeFamily::tabulated(std::move(knots));
  } catch (const std::invalid_argument& e) {
    throw OptimizerError(std::string("optimal sizes do not form a size function: ") + e.what(),
                         out.solutions.front());
  }
  return out;
}

}  // namespace mdf

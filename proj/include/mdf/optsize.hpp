#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "mdf/size_function.hpp"

namespace mdf {

// Power of a one-sided normal-shift test given size a: Phi(Phi^{-1}(a) + theta).
double roc_normal_shift(double a, double theta);
// d/da of roc_normal_shift: exp(-theta z - theta^2 / 2), z = Phi^{-1}(a).
double roc_normal_shift_slope(double a, double theta);

// ROC curves of the M tests at a fixed alternative, one mean shift per test.
class RocModel {
 public:
  explicit RocModel(std::vector<double> thetas);

  std::size_t size() const { return thetas_.size(); }
  const std::vector<double>& thetas() const { return thetas_; }
  double power(std::size_t m, double a) const { return roc_normal_shift(a, thetas_[m]); }
  double slope(std::size_t m, double a) const { return roc_normal_shift_slope(a, thetas_[m]); }
  // sum_m pi_m(1 - (1 - alpha)^{w_m})
  double total_power(double alpha, std::span<const double> weights) const;

 private:
  std::vector<double> thetas_;
};

// Exponent weights w on the simplex; sizes are A_m(alpha) = 1 - (1-alpha)^{w_m},
// so prod_m (1 - A_m(alpha)) = 1 - alpha holds exactly.
struct WeightSolution {
  double alpha = 0.0;
  std::vector<double> weights;
  double total_power = 0.0;
  // Relative Lagrangian stationarity: spread of the partial derivatives over
  // the support, divided by the multiplier.
  double kkt_residual = 0.0;
  std::size_t iterations = 0;
};

struct OptimizerOptions {
  std::size_t max_iterations = 400;
  double kkt_tolerance = 1e-8;
};

// The optimizer stopped at its iteration cap; best() is the last feasible iterate.
class OptimizerError : public std::runtime_error {
 public:
  OptimizerError(const std::string& what, WeightSolution best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const WeightSolution& best() const { return best_; }

 private:
  WeightSolution best_;
};

WeightSolution optimize_weights_at_alpha(const RocModel& roc, double alpha,
                                         const OptimizerOptions& options = {});

struct FamilyOptions {
  double repair_budget = 1e-3;
  OptimizerOptions optimizer;
  bool parallel = true;
};

struct OptimalFamily {
  SizeFamily family;
  std::vector<double> grid;
  std::vector<WeightSolution> solutions;
  // Largest change made by the isotonic repair over all components.
  double max_repair = 0.0;
};

// Increasing isotonic regression (pool adjacent violators), equal weights.
std::vector<double> isotonic_increasing(std::span<const double> values);

// Solves the weights at every grid point, repairs each component to be
// increasing across the grid and tabulates the result. Throws OptimizerError
// on non-convergence or when the repair exceeds the budget.
OptimalFamily build_optimal_family(const RocModel& roc, std::span<const double> grid,
                                   const FamilyOptions& options = {});

}  // namespace mdf

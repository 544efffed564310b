#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace mdf {

enum class SizeKind { Sidak, Bonferroni, Weighted, Tabulated };

std::string to_string(SizeKind kind);

struct Knot {
  double alpha;
  double value;
};

double sidak_size(double alpha, std::size_t battery_size);
double bonferroni_size(double alpha, std::size_t battery_size);
// 1 - (1 - alpha)^weight
double weighted_size(double alpha, double weight);

// A single per-test size function alpha -> A_m(alpha) on [0,1].
//
// Tabulated functions interpolate linearly in log-survival coordinates
// (-log(1 - alpha), -log(1 - A)), anchored at (0,0). Beyond the last knot the
// final segment is extended, so A(1) = 1. Knots must be strictly increasing
// in both coordinates and lie inside the open unit square; the pins (0,0)
// and (1,1) may be supplied and are dropped.
class SizeFunction {
 public:
  static SizeFunction sidak(std::size_t battery_size);
  static SizeFunction bonferroni(std::size_t battery_size);
  static SizeFunction weighted(std::size_t battery_size, double weight);
  static SizeFunction tabulated(std::size_t battery_size, std::vector<Knot> knots);

  SizeKind kind() const { return kind_; }
  std::size_t battery_size() const { return battery_size_; }
  double weight() const { return weight_; }
  // Interior knots only (pins removed).
  const std::vector<Knot>& knots() const { return knots_; }

  double operator()(double alpha) const { return evaluate(alpha); }
  double evaluate(double alpha) const;
  // log(1 - A(alpha)), without cancellation near alpha = 0.
  double log_survival(double alpha) const;
  // Smallest alpha with A(alpha) = u. Throws std::domain_error when u is
  // outside the range of the function.
  double invert(double u) const;
  // Upper end of the range, A(1).
  double range_max() const;

  // The same function on the budget scale s = -log(1 - alpha) in [0, inf].
  // Budgets that round to alpha = 1 in double precision stay distinct here.
  double log_survival_s(double s) const;
  double evaluate_s(double s) const { return -std::expm1(log_survival_s(s)); }
  // Smallest s with A = u; infinite when u = 1.
  double invert_s(double u) const;

 private:
  SizeFunction(SizeKind kind, std::size_t battery_size, double weight)
      : kind_(kind), battery_size_(battery_size), weight_(weight) {}

  double tabulated_log_survival(double s) const;

  SizeKind kind_;
  std::size_t battery_size_;
  double weight_;
  std::vector<Knot> knots_;
  // Knots in log-survival coordinates, including the origin.
  std::vector<double> s_;
  std::vector<double> u_;
};

double invert_size(const SizeFunction& f, double u);

// The vector A = (A_m) of size functions, one per test.
class SizeFamily {
 public:
  explicit SizeFamily(std::vector<SizeFunction> members);

  static SizeFamily sidak(std::size_t battery_size);
  static SizeFamily bonferroni(std::size_t battery_size);
  static SizeFamily weighted(std::span<const double> weights);
  static SizeFamily tabulated(std::vector<std::vector<Knot>> knots);

  std::size_t size() const { return members_.size(); }
  const SizeFunction& operator[](std::size_t m) const { return members_[m]; }
  const std::vector<SizeFunction>& members() const { return members_; }
  // Every member has the same kind.
  SizeKind kind() const { return members_.front().kind(); }

  double total_size(double alpha) const;
  double total_size_s(double s) const;
  // log prod_m (1 - A_m(alpha))
  double log_product_survival(double alpha) const;

 private:
  std::vector<SizeFunction> members_;
};

enum class Condition { None, A1, A2, A3, A4 };
std::string to_string(Condition c);

struct Violation {
  Condition condition = Condition::None;
  double alpha = 0.0;
  double magnitude = 0.0;
};

struct ValidationReport {
  bool a1_pass = true;
  bool a2_pass = true;
  bool a3_pass = true;
  std::map<std::size_t, bool> a4_pass_by_k;
  Violation worst_violation;

  bool a1_to_a3_pass() const { return a1_pass && a2_pass && a3_pass; }
};

inline constexpr double kDefaultTolerance = 1e-9;
inline constexpr std::size_t kDefaultGridSize = 1001;

// Grid check of A1-A4. A4 uses the worst case over null sets of size k:
// k * max_m A_m(alpha) <= sum_m A_m(alpha) + tol.
ValidationReport validate_family(const SizeFamily& family,
                                 std::size_t grid_size = kDefaultGridSize,
                                 std::size_t k_max = 0,  // 0 means M
                                 double tol = kDefaultTolerance);

// A4 against a known null set:
// |nulls| * max_{m in nulls} A_m(alpha) <= sum_m A_m(alpha) + tol on the grid.
bool satisfies_a4_exact(const SizeFamily& family, std::span<const std::size_t> nulls,
                        std::size_t grid_size = kDefaultGridSize,
                        double tol = kDefaultTolerance);

}  // namespace mdf

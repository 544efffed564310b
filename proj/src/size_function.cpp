#include "mdf/size_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mdf {

namespace {

void check_alpha(double alpha, const char* who) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::domain_error(std::string(who) + ": alpha must lie in [0,1]");
  }
}

void check_battery(std::size_t battery_size, const char* who) {
  if (battery_size == 0) {
    throw std::domain_error(std::string(who) + ": battery size must be positive");
  }
}

void check_weight(double weight) {
  if (!(weight > 0.0 && weight <= 1.0)) {
    throw std::domain_error("weighted size: weight must lie in (0,1]");
  }
}

double to_log_survival_coord(double x) { return -std::log1p(-x); }

}  // namespace

std::string to_string(SizeKind kind) {
  switch (kind) {
    case SizeKind::Sidak: return "sidak";
    case SizeKind::Bonferroni: return "bonferroni";
    case SizeKind::Weighted: return "weighted";
    case SizeKind::Tabulated: return "tabulated";
  }
  return "unknown";
}

double sidak_size(double alpha, std::size_t battery_size) {
  check_alpha(alpha, "sidak_size");
  check_battery(battery_size, "sidak_size");
  return -std::expm1(std::log1p(-alpha) / static_cast<double>(battery_size));
}

double bonferroni_size(double alpha, std::size_t battery_size) {
  check_alpha(alpha, "bonferroni_size");
  check_battery(battery_size, "bonferroni_size");
  return alpha / static_cast<double>(battery_size);
}

double weighted_size(double alpha, double weight) {
  check_alpha(alpha, "weighted_size");
  check_weight(weight);
  return -std::expm1(weight * std::log1p(-alpha));
}

SizeFunction SizeFunction::sidak(std::size_t battery_size) {
  check_battery(battery_size, "SizeFunction::sidak");
  return SizeFunction(SizeKind::Sidak, battery_size, 1.0 / static_cast<double>(battery_size));
}

SizeFunction SizeFunction::bonferroni(std::size_t battery_size) {
  check_battery(battery_size, "SizeFunction::bonferroni");
  return SizeFunction(SizeKind::Bonferroni, battery_size, 0.0);
}

SizeFunction SizeFunction::weighted(std::size_t battery_size, double weight) {
  check_battery(battery_size, "SizeFunction::weighted");
  check_weight(weight);
  return SizeFunction(SizeKind::Weighted, battery_size, weight);
}

SizeFunction SizeFunction::tabulated(std::size_t battery_size, std::vector<Knot> knots) {
  check_battery(battery_size, "SizeFunction::tabulated");
  std::erase_if(knots, [](const Knot& k) {
    return (k.alpha == 0.0 && k.value == 0.0) || (k.alpha == 1.0 && k.value == 1.0);
  });
  if (knots.empty()) {
    throw std::invalid_argument("tabulated size: at least one interior knot is required");
  }
  SizeFunction f(SizeKind::Tabulated, battery_size, 0.0);
  f.s_.push_back(0.0);
  f.u_.push_back(0.0);
  for (const Knot& k : knots) {
    if (!(k.alpha > 0.0 && k.alpha < 1.0 && k.value > 0.0 && k.value < 1.0)) {
      throw std::invalid_argument("tabulated size: interior knots must lie in (0,1)^2");
    }
    const double s = to_log_survival_coord(k.alpha);
    const double u = to_log_survival_coord(k.value);
    if (!(s > f.s_.back() && u > f.u_.back())) {
      throw std::invalid_argument("tabulated size: knots must be strictly increasing");
    }
    f.s_.push_back(s);
    f.u_.push_back(u);
  }
  f.knots_ = std::move(knots);
  return f;
}

double SizeFunction::tabulated_log_survival(double s) const {
  const std::size_t last = s_.size() - 1;
  std::size_t hi;
  if (s >= s_[last]) {
    hi = last;
  } else {
    hi = static_cast<std::size_t>(std::upper_bound(s_.begin(), s_.end(), s) - s_.begin());
  }
  const std::size_t lo = hi - 1;
  const double slope = (u_[hi] - u_[lo]) / (s_[hi] - s_[lo]);
  if (std::isinf(s)) return -std::numeric_limits<double>::infinity();
  return -(u_[lo] + slope * (s - s_[lo]));
}

double SizeFunction::log_survival(double alpha) const {
  check_alpha(alpha, "SizeFunction");
  switch (kind_) {
    case SizeKind::Sidak:
      return std::log1p(-alpha) / static_cast<double>(battery_size_);
    case SizeKind::Weighted:
      return weight_ * std::log1p(-alpha);
    case SizeKind::Bonferroni:
      return std::log1p(-alpha / static_cast<double>(battery_size_));
    case SizeKind::Tabulated:
      return tabulated_log_survival(to_log_survival_coord(alpha));
  }
  return 0.0;
}

double SizeFunction::evaluate(double alpha) const {
  if (kind_ == SizeKind::Bonferroni) return bonferroni_size(alpha, battery_size_);
  return -std::expm1(log_survival(alpha));
}

double SizeFunction::range_max() const {
  return kind_ == SizeKind::Bonferroni ? 1.0 / static_cast<double>(battery_size_) : 1.0;
}

double SizeFunction::log_survival_s(double s) const {
  if (!(s >= 0.0)) throw std::domain_error("SizeFunction: budget scale s must be nonnegative");
  switch (kind_) {
    case SizeKind::Sidak:
      return -s / static_cast<double>(battery_size_);
    case SizeKind::Weighted:
      return -weight_ * s;
    case SizeKind::Bonferroni:
      return std::log1p(std::expm1(-s) / static_cast<double>(battery_size_));
    case SizeKind::Tabulated:
      return tabulated_log_survival(s);
  }
  return 0.0;
}

double SizeFunction::invert_s(double u) const {
  if (!(u >= 0.0 && u <= range_max())) {
    throw std::domain_error("invert_size: value " + std::to_string(u) +
                            " outside the range of the " + to_string(kind_) +
                            " size function");
  }
  const double t = to_log_survival_coord(u);
  switch (kind_) {
    case SizeKind::Sidak:
      return static_cast<double>(battery_size_) * t;
    case SizeKind::Weighted:
      return t / weight_;
    case SizeKind::Bonferroni:
      return to_log_survival_coord(std::min(1.0, u * static_cast<double>(battery_size_)));
    case SizeKind::Tabulated:
      break;
  }
  if (std::isinf(t)) return t;
  // Piecewise linear in (s, t); the last segment extends to infinity.
  const std::size_t last = u_.size() - 1;
  std::size_t hi;
  if (t >= u_[last]) {
    hi = last;
  } else {
    hi = static_cast<std::size_t>(std::upper_bound(u_.begin(), u_.end(), t) - u_.begin());
  }
  const std::size_t lo = hi - 1;
  return s_[lo] + (t - u_[lo]) * (s_[hi] - s_[lo]) / (u_[hi] - u_[lo]);
}

double SizeFunction::invert(double u) const {
  if (kind_ == SizeKind::Bonferroni && u >= 0.0 && u <= range_max()) {
    return std::min(1.0, u * static_cast<double>(battery_size_));
  }
  return -std::expm1(-invert_s(u));
}

double invert_size(const SizeFunction& f, double u) { return f.invert(u); }

SizeFamily::SizeFamily(std::vector<SizeFunction> members) : members_(std::move(members)) {
  if (members_.empty()) {
    throw std::invalid_argument("size family must have at least one member");
  }
  const std::size_t m = members_.size();
  for (const SizeFunction& f : members_) {
    if (f.battery_size() != m) {
      throw std::invalid_argument("size family members must share battery size M = " +
                                  std::to_string(m));
    }
    if (f.kind() != members_.front().kind()) {
      throw std::invalid_argument("size family members must share one kind");
    }
  }
}

SizeFamily SizeFamily::sidak(std::size_t battery_size) {
  return SizeFamily(std::vector<SizeFunction>(battery_size, SizeFunction::sidak(battery_size)));
}

SizeFamily SizeFamily::bonferroni(std::size_t battery_size) {
  return SizeFamily(
      std::vector<SizeFunction>(battery_size, SizeFunction::bonferroni(battery_size)));
}

SizeFamily SizeFamily::weighted(std::span<const double> weights) {
  std::vector<SizeFunction> members;
  members.reserve(weights.size());
  for (double w : weights) members.push_back(SizeFunction::weighted(weights.size(), w));
  return SizeFamily(std::move(members));
}

SizeFamily SizeFamily::tabulated(std::vector<std::vector<Knot>> knots) {
  std::vector<SizeFunction> members;
  members.reserve(knots.size());
  for (auto& k : knots) members.push_back(SizeFunction::tabulated(knots.size(), std::move(k)));
  return SizeFamily(std::move(members));
}

double SizeFamily::total_size(double alpha) const {
  double total = 0.0;
  for (const SizeFunction& f : members_) total += f.evaluate(alpha);
  return total;
}

double SizeFamily::total_size_s(double s) const {
  double total = 0.0;
  for (const SizeFunction& f : members_) total += f.evaluate_s(s);
  return total;
}

double SizeFamily::log_product_survival(double alpha) const {
  double total = 0.0;
  for (const SizeFunction& f : members_) total += f.log_survival(alpha);
  return total;
}

std::string to_string(Condition c) {
  switch (c) {
    case Condition::None: return "none";
    case Condition::A1: return "A1";
    case Condition::A2: return "A2";
    case Condition::A3: return "A3";
    case Condition::A4: return "A4";
  }
  return "unknown";
}

namespace {

void note(Violation& worst, Condition c, double alpha, double magnitude) {
  if (magnitude > worst.magnitude || worst.condition == Condition::None) {
    worst = {c, alpha, magnitude};
  }
}

std::vector<double> uniform_grid(std::size_t n) {
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = static_cast<double>(i) / static_cast<double>(n - 1);
  }
  grid.back() = 1.0;
  return grid;
}

}  // namespace

ValidationReport validate_family(const SizeFamily& family, std::size_t grid_size,
                                 std::size_t k_max, double tol) {
  const std::size_t m = family.size();
  if (grid_size < 2) throw std::invalid_argument("validate_family: grid_size must be >= 2");
  if (k_max == 0) k_max = m;
  if (k_max > m) throw std::invalid_argument("validate_family: k_max must not exceed M");

  ValidationReport report;
  for (std::size_t k = 1; k <= k_max; ++k) report.a4_pass_by_k[k] = true;

  for (const SizeFunction& f : family.members()) {
    const double d0 = std::fabs(f.evaluate(0.0));
    const double d1 = std::fabs(f.evaluate(1.0) - 1.0);
    if (d0 > tol) {
      report.a1_pass = false;
      note(report.worst_violation, Condition::A1, 0.0, d0);
    }
    if (d1 > tol) {
      report.a1_pass = false;
      note(report.worst_violation, Condition::A1, 1.0, d1);
    }
  }

  const std::vector<double> grid = uniform_grid(grid_size);
  std::vector<double> previous(m);
  std::vector<double> sizes(m);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double alpha = grid[i];
    for (std::size_t j = 0; j < m; ++j) sizes[j] = family[j].evaluate(alpha);

    if (i > 0) {
      for (std::size_t j = 0; j < m; ++j) {
        if (!(sizes[j] > previous[j])) {
          report.a2_pass = false;
          note(report.worst_violation, Condition::A2, alpha, previous[j] - sizes[j]);
        }
      }
    }

    const double product = std::exp(family.log_product_survival(alpha));
    const double deficit = (1.0 - alpha) - product;
    if (deficit > tol) {
      report.a3_pass = false;
      note(report.worst_violation, Condition::A3, alpha, deficit);
    }

    const double largest = *std::max_element(sizes.begin(), sizes.end());
    double total = 0.0;
    for (double a : sizes) total += a;
    for (std::size_t k = 1; k <= k_max; ++k) {
      const double excess = static_cast<double>(k) * largest - total;
      if (excess > tol) {
        report.a4_pass_by_k[k] = false;
        note(report.worst_violation, Condition::A4, alpha, excess);
      }
    }
    previous.swap(sizes);
  }
  return report;
}

bool satisfies_a4_exact(const SizeFamily& family, std::span<const std::size_t> nulls,
                        std::size_t grid_size, double tol) {
  if (nulls.empty()) return true;
  if (grid_size < 2) throw std::invalid_argument("satisfies_a4_exact: grid_size must be >= 2");
  for (std::size_t m : nulls) {
    if (m >= family.size()) throw std::out_of_range("satisfies_a4_exact: null index out of range");
  }
  for (double alpha : uniform_grid(grid_size)) {
    double largest = 0.0;
    for (std::size_t m : nulls) largest = std::max(largest, family[m].evaluate(alpha));
    if (static_cast<double>(nulls.size()) * largest > family.total_size(alpha) + tol) {
      return false;
    }
  }
  return true;
}

}  // namespace mdf

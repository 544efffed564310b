#include "mdf/procedures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mdf {

namespace {

constexpr double kBisectionWidth = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_level(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("level q must lie in [0,1]");
}

void check_nonempty(std::size_t m) {
  if (m == 0) throw std::invalid_argument("battery must be nonempty");
}

double to_alpha(double s) { return -std::expm1(-s); }

// log H1 on the budget scale: tests with s_m < s have already been rejected
// just before s and drop out of the product.
double log_h1(const GeneralizedPValues& gp, const SizeFamily& family, double s) {
  double total = 0.0;
  for (std::size_t m = 0; m < gp.size(); ++m) {
    if (!(s > gp.s[m])) total += family[m].log_survival_s(s);
  }
  return total;
}

std::size_t discoveries(const GeneralizedPValues& gp, double s) {
  return static_cast<std::size_t>(
      std::count_if(gp.s.begin(), gp.s.end(), [&](double x) { return x <= s; }));
}

// A finite right end for a bisection whose bracket extends to s = inf:
// doubles from `lo` until `past` holds.
template <typename Past>
double finite_bracket(double lo, double hi, Past past) {
  if (std::isfinite(hi)) return hi;
  double b = std::max(1.0, 2.0 * lo);
  for (int it = 0; it < 2048 && std::isfinite(b) && !past(b); ++it) b *= 2.0;
  return b;
}

bool bracket_open(double a, double b) {
  return b - a > kBisectionWidth * std::max(1.0, a);
}

ProcedureOutcome finish(Procedure procedure, double q, std::size_t cutoff, double threshold_s,
                        const GeneralizedPValues& gp, const SizeFamily& family,
                        bool cross_check) {
  ProcedureOutcome out;
  out.procedure = procedure;
  out.q = q;
  out.J = cutoff;
  out.alpha_threshold = to_alpha(threshold_s);
  out.interval_lo = gp.ordered(cutoff);
  out.interval_hi = gp.ordered(cutoff + 1);
  out.sizes_at_threshold.resize(gp.size());
  for (std::size_t m = 0; m < gp.size(); ++m) {
    out.sizes_at_threshold[m] = family[m].evaluate_s(threshold_s);
  }
  out.rejected_index.assign(gp.antirank.begin(), gp.antirank.begin() + cutoff);

  if (cross_check) {
    // Threshold route: delta_m(A_m(alpha)) = 1{alpha >= alpha_m}.
    std::vector<std::size_t> by_threshold;
    for (std::size_t m = 0; m < gp.size(); ++m) {
      if (gp.s[m] <= threshold_s) by_threshold.push_back(m);
    }
    std::vector<std::size_t> by_cutoff = out.rejected_index;
    std::sort(by_cutoff.begin(), by_cutoff.end());
    if (by_threshold != by_cutoff) {
      throw std::logic_error(to_string(procedure) +
                             ": crossing-time and anti-rank rejection sets disagree");
    }
  }
  return out;
}

void attach_ids(ProcedureOutcome& out, const TestBattery& battery) {
  out.rejected.clear();
  out.rejected.reserve(out.rejected_index.size());
  for (std::size_t m : out.rejected_index) out.rejected.push_back(battery[m].id);
}

}  // namespace

std::string to_string(Procedure p) {
  switch (p) {
    case Procedure::Dagger: return "dagger";
    case Procedure::Star: return "star";
    case Procedure::HolmSidak: return "holm-sidak";
    case Procedure::BH: return "bh";
  }
  return "unknown";
}

Procedure parse_procedure(const std::string& name) {
  if (name == "dagger") return Procedure::Dagger;
  if (name == "star") return Procedure::Star;
  if (name == "holm-sidak") return Procedure::HolmSidak;
  if (name == "bh") return Procedure::BH;
  throw std::invalid_argument("unknown procedure '" + name +
                              "' (expected dagger, star, holm-sidak or bh)");
}

std::size_t j_dagger(const GeneralizedPValues& gp, const SizeFamily& family, double q) {
  check_level(q);
  const std::size_t m_total = gp.size();
  const double bound = std::log1p(-q);
  std::size_t cutoff = 0;
  for (std::size_t j = 1; j <= m_total; ++j) {
    const double s = gp.ordered_s(j);
    double log_product = 0.0;
    for (std::size_t r = j; r <= m_total; ++r) {
      log_product += family[gp.antirank[r - 1]].log_survival_s(s);
    }
    if (!(log_product >= bound)) break;
    cutoff = j;
  }
  return cutoff;
}

std::size_t j_star(const GeneralizedPValues& gp, const SizeFamily& family, double q) {
  check_level(q);
  for (std::size_t k = gp.size(); k >= 1; --k) {
    if (family.total_size_s(gp.ordered_s(k)) <= q * static_cast<double>(k)) return k;
  }
  return 0;
}

double s_dagger(const GeneralizedPValues& gp, const SizeFamily& family, double q) {
  check_level(q);
  if (q == 1.0) return kInf;
  const double bound = std::log1p(-q);
  const auto below = [&](double s) { return log_h1(gp, family, s) < bound; };
  double lo = 0.0;
  for (std::size_t j = 1; j <= gp.size(); ++j) {
    const double hi = gp.ordered_s(j);
    if (hi > lo && below(hi)) {
      // H1 is continuous and decreasing on (lo, hi]; find where it drops below 1 - q.
      double a = lo;
      double b = finite_bracket(lo, hi, below);
      while (bracket_open(a, b)) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        if (below(mid)) {
          b = mid;
        } else {
          a = mid;
        }
      }
      // The crossing lies strictly below hi.
      return b < hi ? b : std::nextafter(hi, lo);
    }
    lo = std::max(lo, hi);
  }
  // Every test is rejected before H1 can cross; beyond s_(M) the product is empty.
  return kInf;
}

double s_star(const GeneralizedPValues& gp, const SizeFamily& family, double q) {
  check_level(q);
  const std::size_t m_total = gp.size();
  for (std::size_t k = m_total; k >= 1; --k) {
    const double lo = gp.ordered_s(k);
    const double hi = gp.ordered_s(k + 1);
    if (k < m_total && !(hi > lo)) continue;
    const double level = q * static_cast<double>(discoveries(gp, lo));
    const auto within = [&](double s) { return family.total_size_s(s) <= level; };
    if (!within(lo)) continue;
    if (k == m_total && within(kInf)) return kInf;
    // Largest s in [lo, hi) with sum_m A_m <= level.
    double a = lo;
    double b = finite_bracket(lo, hi, [&](double s) { return !within(s); });
    while (bracket_open(a, b)) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (within(mid)) {
        a = mid;
      } else {
        b = mid;
      }
    }
    return a;
  }
  return 0.0;
}

double alpha_dagger(const GeneralizedPValues& gp, const SizeFamily& family, double q) {
  return to_alpha(s_dagger(gp, family, q));
}

double alpha_star(const GeneralizedPValues& gp, const SizeFamily& family, double q) {
  return to_alpha(s_star(gp, family, q));
}

std::size_t holm_sidak_stepdown(std::span<const double> pvalues, double q) {
  check_level(q);
  std::vector<double> sorted(pvalues.begin(), pvalues.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m_total = sorted.size();
  const double log_keep = std::log1p(-q);
  std::size_t cutoff = 0;
  for (std::size_t j = 1; j <= m_total; ++j) {
    const double threshold = -std::expm1(log_keep / static_cast<double>(m_total - j + 1));
    if (!(sorted[j - 1] <= threshold)) break;
    cutoff = j;
  }
  return cutoff;
}

std::size_t bh_stepup(std::span<const double> pvalues, double q) {
  check_level(q);
  std::vector<double> sorted(pvalues.begin(), pvalues.end());
  std::sort(sorted.begin(), sorted.end());
  const auto m_total = static_cast<double>(sorted.size());
  for (std::size_t k = sorted.size(); k >= 1; --k) {
    if (sorted[k - 1] <= q * static_cast<double>(k) / m_total) return k;
  }
  return 0;
}

ProcedureOutcome decide(Procedure procedure, std::span<const double> pvalues,
                        const SizeFamily& family, double q) {
  check_level(q);
  check_nonempty(pvalues.size());
  switch (procedure) {
    case Procedure::Dagger: {
      const GeneralizedPValues gp = generalized_pvalues(pvalues, family);
      return finish(procedure, q, j_dagger(gp, family, q), s_dagger(gp, family, q), gp, family,
                    true);
    }
    case Procedure::Star: {
      const GeneralizedPValues gp = generalized_pvalues(pvalues, family);
      return finish(procedure, q, j_star(gp, family, q), s_star(gp, family, q), gp, family,
                    true);
    }
    case Procedure::HolmSidak:
    case Procedure::BH: {
      const SizeFamily sidak = SizeFamily::sidak(pvalues.size());
      GeneralizedPValues gp = generalized_pvalues(pvalues, sidak);
      gp.antirank = anti_ranks(pvalues);
      const std::size_t cutoff = procedure == Procedure::HolmSidak
                                     ? holm_sidak_stepdown(pvalues, q)
                                     : bh_stepup(pvalues, q);
      return finish(procedure, q, cutoff, gp.ordered_s(cutoff), gp, sidak, false);
    }
  }
  throw std::invalid_argument("unknown procedure");
}

ProcedureOutcome reject(Procedure procedure, const TestBattery& battery, const SizeFamily& family,
                        double q) {
  check_nonempty(battery.size());
  const std::vector<double> p = battery.pvalues();
  ProcedureOutcome out = decide(procedure, p, family, q);
  attach_ids(out, battery);
  return out;
}

ProcedureOutcome reject_dagger(const TestBattery& battery, const SizeFamily& family, double q) {
  return reject(Procedure::Dagger, battery, family, q);
}

ProcedureOutcome reject_star(const TestBattery& battery, const SizeFamily& family, double q) {
  return reject(Procedure::Star, battery, family, q);
}

ProcedureOutcome reject_holm_sidak(const TestBattery& battery, double q) {
  check_nonempty(battery.size());
  return reject(Procedure::HolmSidak, battery, SizeFamily::sidak(battery.size()), q);
}

ProcedureOutcome reject_bh(const TestBattery& battery, double q) {
  check_nonempty(battery.size());
  return reject(Procedure::BH, battery, SizeFamily::sidak(battery.size()), q);
}

}  // namespace mdf

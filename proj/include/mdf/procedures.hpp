#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mdf/pvalues.hpp"
#include "mdf/size_function.hpp"

namespace mdf {

// Dagger: the FWER-controlling first-crossing MDF.
// Star: the FDR-controlling last-crossing MDF.
// HolmSidak and BH are the classical procedures on ordinary p-values.
enum class Procedure { Dagger, Star, HolmSidak, BH };

std::string to_string(Procedure p);
// Accepts "dagger", "star", "holm-sidak", "bh". Throws std::invalid_argument.
Procedure parse_procedure(const std::string& name);

// True for the procedures whose guarantee is on the FWER.
inline bool controls_fwer(Procedure p) {
  return p == Procedure::Dagger || p == Procedure::HolmSidak;
}

struct ProcedureOutcome {
  Procedure procedure = Procedure::Dagger;
  double q = 0.0;
  std::size_t J = 0;
  double alpha_threshold = 0.0;
  // [alpha_(J), alpha_(J+1)) with alpha_(0) = 0, alpha_(M+1) = 1. Closed on
  // the right when J = M.
  double interval_lo = 0.0;
  double interval_hi = 1.0;
  std::vector<double> sizes_at_threshold;
  // 0-based battery positions, most significant first.
  std::vector<std::size_t> rejected_index;
  std::vector<std::string> rejected;
};

// Step-down cutoff: largest k such that
//   prod_{r=j}^{M} [1 - A_(r)(alpha_(j))] >= 1 - q   for all j <= k.
std::size_t j_dagger(const GeneralizedPValues& gp, const SizeFamily& family, double q);
// Step-up cutoff: largest k with sum_m A_m(alpha_(k)) <= q k.
std::size_t j_star(const GeneralizedPValues& gp, const SizeFamily& family, double q);

// inf{alpha : H1(alpha) < 1 - q}, where H1 drops test m from the product once
// alpha > alpha_m. Returns 1 when the product never crosses.
double alpha_dagger(const GeneralizedPValues& gp, const SizeFamily& family, double q);
// sup{alpha : sum_m A_m(alpha) <= q S(alpha)}, S(alpha) = #{m : alpha_m <= alpha}.
double alpha_star(const GeneralizedPValues& gp, const SizeFamily& family, double q);
// The same crossing times on the budget scale s = -log(1 - alpha). These are
// what the procedures compare against GeneralizedPValues::s.
double s_dagger(const GeneralizedPValues& gp, const SizeFamily& family, double q);
double s_star(const GeneralizedPValues& gp, const SizeFamily& family, double q);

// Battery-free forms used by the simulation kernels; `rejected` is left empty.
ProcedureOutcome decide(Procedure procedure, std::span<const double> pvalues,
                        const SizeFamily& family, double q);

ProcedureOutcome reject_dagger(const TestBattery& battery, const SizeFamily& family, double q);
ProcedureOutcome reject_star(const TestBattery& battery, const SizeFamily& family, double q);
ProcedureOutcome reject_holm_sidak(const TestBattery& battery, double q);
ProcedureOutcome reject_bh(const TestBattery& battery, double q);
// HolmSidak and BH ignore `family`.
ProcedureOutcome reject(Procedure procedure, const TestBattery& battery, const SizeFamily& family,
                        double q);

// Reference implementations on ordinary p-values.
std::size_t holm_sidak_stepdown(std::span<const double> pvalues, double q);
std::size_t bh_stepup(std::span<const double> pvalues, double q);

}  // namespace mdf

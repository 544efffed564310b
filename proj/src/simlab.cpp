#include "mdf/simlab.hpp"

#include <omp.h>

#include <cmath>
#include <exception>
#include <numeric>
#include <string>

#include "mdf/normal.hpp"
#include "mdf/random.hpp"

namespace mdf {

namespace {

double pvalue_of(double z, Tail tail) {
  return tail == Tail::OneSided ? normal_sf(z) : std::erfc(std::fabs(z) / std::sqrt(2.0));
}

std::vector<std::size_t> null_indices(const SimConfig& config) {
  std::vector<std::size_t> nulls(config.m0);
  std::iota(nulls.begin(), nulls.end(), std::size_t{0});
  return nulls;
}

void check_family(const SimConfig& config, const SizeFamily& family) {
  if (config.procedure != Procedure::Dagger && config.procedure != Procedure::Star) return;
  const ValidationReport report = validate_family(family);
  if (!report.a1_to_a3_pass()) {
    const Violation& v = report.worst_violation;
    throw RefusedConfig("size family fails " + to_string(v.condition) + " (alpha = " +
                        std::to_string(v.alpha) + ", magnitude " + std::to_string(v.magnitude) +
                        "); conditions A1-A3 are required");
  }
  if (config.procedure == Procedure::Star) {
    const auto nulls = null_indices(config);
    if (!satisfies_a4_exact(family, nulls)) {
      throw RefusedConfig("size family fails A4 for the configured null set (m0 = " +
                          std::to_string(config.m0) + "); the star procedure requires A4");
    }
  }
}

ErrorCounts run_replicate(const SimConfig& config, const SizeFamily& family,
                          const std::vector<bool>& is_null, std::uint64_t index,
                          std::vector<double>& buffer) {
  gen_pvalues(config, index, buffer);
  const ProcedureOutcome outcome = decide(config.procedure, buffer, family, config.q);
  return count_errors(outcome.rejected_index, is_null);
}

SimResult summarize(const SimConfig& config, std::vector<ErrorCounts> counts,
                    bool keep_replicates) {
  SimResult result;
  result.config = config;
  result.k_sigma = config.k_sigma;
  result.rates = estimate_rates(counts);
  result.pass_fwer = result.rates.fwer_hat <= config.q + config.k_sigma * result.rates.se_fwer;
  result.pass_fdr = result.rates.fdr_hat <= config.q + config.k_sigma * result.rates.se_fdr;
  if (keep_replicates) result.replicate_counts = std::move(counts);
  return result;
}

std::vector<bool> null_mask(const SimConfig& config) {
  std::vector<bool> is_null(config.M, false);
  for (std::size_t m = 0; m < config.m0; ++m) is_null[m] = true;
  return is_null;
}

}  // namespace

void validate_config(const SimConfig& config) {
  if (config.M == 0) throw std::invalid_argument("M must be at least 1");
  if (config.m0 > config.M) throw std::invalid_argument("m0 must lie in 0..M");
  if (config.effects.size() != config.M - config.m0) {
    throw std::invalid_argument("effects must have M - m0 = " +
                                std::to_string(config.M - config.m0) + " entries");
  }
  for (double theta : config.effects) {
    if (!std::isfinite(theta)) throw std::invalid_argument("effects must be finite");
  }
  if (!(config.alt_correlation >= 0.0 && config.alt_correlation < 1.0)) {
    throw std::invalid_argument("alt_correlation must lie in [0,1)");
  }
  if (!(config.q >= 0.0 && config.q <= 1.0)) throw std::invalid_argument("q must lie in [0,1]");
  if (config.replicates == 0) throw std::invalid_argument("replicates must be at least 1");
  if (!(config.k_sigma >= 0.0)) throw std::invalid_argument("k_sigma must be nonnegative");
  if (config.size_family && config.size_family->size() != config.M) {
    throw std::invalid_argument("size family has M = " +
                                std::to_string(config.size_family->size()) +
                                " but the experiment has M = " + std::to_string(config.M));
  }
}

void gen_pvalues(const SimConfig& config, std::uint64_t stream_index, std::span<double> out) {
  if (out.size() != config.M) throw std::invalid_argument("gen_pvalues: output size must be M");
  Stream stream(config.seed, stream_index);
  for (std::size_t m = 0; m < config.m0; ++m) out[m] = pvalue_of(stream.normal(), config.tail);
  if (config.m0 == config.M) return;
  const double shared = stream.normal();
  const double load = std::sqrt(config.alt_correlation);
  const double own = std::sqrt(1.0 - config.alt_correlation);
  for (std::size_t m = config.m0; m < config.M; ++m) {
    const double z = load * shared + own * stream.normal() + config.effects[m - config.m0];
    out[m] = pvalue_of(z, config.tail);
  }
}

Replicate gen_replicate(const SimConfig& config, std::uint64_t stream_index) {
  validate_config(config);
  std::vector<double> p(config.M);
  gen_pvalues(config, stream_index, p);
  TestBattery battery = TestBattery::from_pvalues(p);
  std::vector<std::string> nulls;
  std::vector<std::string> alts;
  for (std::size_t m = 0; m < config.M; ++m) {
    (m < config.m0 ? nulls : alts).push_back(battery[m].id);
  }
  return {std::move(battery), GroundTruth(std::move(nulls), std::move(alts))};
}

SimResult run_experiment_serial(const SimConfig& config, bool keep_replicates) {
  validate_config(config);
  const SizeFamily family = config.family();
  check_family(config, family);
  const std::vector<bool> is_null = null_mask(config);
  std::vector<double> buffer(config.M);
  std::vector<ErrorCounts> counts(config.replicates);
  for (std::size_t i = 0; i < config.replicates; ++i) {
    counts[i] = run_replicate(config, family, is_null, i, buffer);
  }
  return summarize(config, std::move(counts), keep_replicates);
}

SimResult run_experiment(const SimConfig& config, const RunOptions& options) {
  validate_config(config);
  const SizeFamily family = config.family();
  check_family(config, family);
  const std::vector<bool> is_null = null_mask(config);
  std::vector<ErrorCounts> counts(config.replicates);
  const auto n = static_cast<std::int64_t>(config.replicates);
  const int workers = options.workers > 0 ? options.workers : omp_get_max_threads();

  std::exception_ptr failure;
#pragma omp parallel num_threads(workers)
  {
    std::vector<double> buffer(config.M);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        counts[static_cast<std::size_t>(i)] =
            run_replicate(config, family, is_null, static_cast<std::uint64_t>(i), buffer);
      } catch (...) {
#pragma omp critical(mdf_simlab_failure)
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  return summarize(config, std::move(counts), options.keep_replicates);
}

bool check_bounds(const SimResult& result, double q, double k_sigma) {
  const RateEstimates& r = result.rates;
  if (controls_fwer(result.config.procedure)) return r.fwer_hat <= q + k_sigma * r.se_fwer;
  return r.fdr_hat <= q + k_sigma * r.se_fdr;
}

}  // namespace mdf

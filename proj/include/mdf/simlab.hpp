#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mdf/errmetrics.hpp"
#include "mdf/procedures.hpp"
#include "mdf/pvalues.hpp"
#include "mdf/size_function.hpp"

namespace mdf {

enum class Tail { OneSided, TwoSided };

// Gaussian-shift experiment. Tests 0..m0-1 are true nulls drawn
// independently; tests m0..M-1 are alternatives with mean shifts `effects`
// and equicorrelation `alt_correlation` through a shared factor.
struct SimConfig {
  std::size_t M = 1;
  std::size_t m0 = 1;
  std::vector<double> effects;
  double alt_correlation = 0.0;
  Tail tail = Tail::OneSided;
  double q = 0.05;
  Procedure procedure = Procedure::Dagger;
  // Empty means Sidak sizes for M tests.
  std::optional<SizeFamily> size_family;
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
  double k_sigma = 3.0;

  SizeFamily family() const { return size_family ? *size_family : SizeFamily::sidak(M); }
};

// Throws std::invalid_argument on an inconsistent config.
void validate_config(const SimConfig& config);

// The experiment is not run because the size family does not meet the
// conditions the configured procedure relies on.
class RefusedConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Replicate {
  TestBattery battery;
  GroundTruth truth;
};

// p-values of replicate `stream_index`; out.size() must equal M.
void gen_pvalues(const SimConfig& config, std::uint64_t stream_index, std::span<double> out);
Replicate gen_replicate(const SimConfig& config, std::uint64_t stream_index);

struct SimResult {
  SimConfig config;
  RateEstimates rates;
  bool pass_fwer = false;
  bool pass_fdr = false;
  double k_sigma = 3.0;
  // Filled when requested.
  std::vector<ErrorCounts> replicate_counts;
};

struct RunOptions {
  int workers = 0;  // 0: OpenMP default
  bool keep_replicates = false;
};

// Replicates run on an OpenMP team; the reduction is in replicate order, so the
// result does not depend on the number of workers.
SimResult run_experiment(const SimConfig& config, const RunOptions& options = {});
// Plain loop over replicates. Reference for the parallel kernel.
SimResult run_experiment_serial(const SimConfig& config, bool keep_replicates = false);

// rate <= q + k_sigma * SE for the rate the configured procedure controls.
bool check_bounds(const SimResult& result, double q, double k_sigma);

}  // namespace mdf

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mdf/procedures.hpp"

namespace mdf {

// Partition of the battery's ids into true nulls and true alternatives.
class GroundTruth {
 public:
  GroundTruth(std::vector<std::string> null_ids, std::vector<std::string> alt_ids);

  const std::vector<std::string>& null_ids() const { return null_ids_; }
  const std::vector<std::string>& alt_ids() const { return alt_ids_; }
  std::size_t size() const { return null_ids_.size() + alt_ids_.size(); }
  bool is_null(const std::string& id) const;
  bool contains(const std::string& id) const;

 private:
  std::vector<std::string> null_ids_;
  std::vector<std::string> alt_ids_;
  // Sorted copies for lookup.
  std::vector<std::string> sorted_nulls_;
  std::vector<std::string> sorted_alts_;
};

struct ErrorCounts {
  std::size_t s0 = 0;  // false discoveries
  std::size_t s = 0;   // discoveries
  double fdp = 0.0;    // s0 / s, 0 when s = 0
  double missed_prop = 0.0;
};

struct RateEstimates {
  double fwer_hat = 0.0;
  double fdr_hat = 0.0;
  double mdr_hat = 0.0;
  double se_fwer = 0.0;
  double se_fdr = 0.0;
  double se_mdr = 0.0;
  std::size_t replicates = 0;
};

ErrorCounts count_errors(const ProcedureOutcome& outcome, const GroundTruth& truth);
// Index form: is_null[m] flags battery position m as a true null.
ErrorCounts count_errors(std::span<const std::size_t> rejected_index,
                         const std::vector<bool>& is_null);

RateEstimates estimate_rates(std::span<const ErrorCounts> counts);

}  // namespace mdf

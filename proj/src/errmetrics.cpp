#include "mdf/errmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mdf {

namespace {

bool sorted_contains(const std::vector<std::string>& v, const std::string& id) {
  return std::binary_search(v.begin(), v.end(), id);
}

ErrorCounts make_counts(std::size_t s0, std::size_t s, std::size_t alts, std::size_t alts_hit) {
  ErrorCounts c;
  c.s0 = s0;
  c.s = s;
  c.fdp = s > 0 ? static_cast<double>(s0) / static_cast<double>(s) : 0.0;
  c.missed_prop =
      alts > 0 ? static_cast<double>(alts - alts_hit) / static_cast<double>(alts) : 0.0;
  return c;
}

struct MeanSe {
  double mean;
  double se;
};

// Two passes over values shifted by the first one, so identical replicates
// give an SE of exactly zero.
template <typename Get>
MeanSe mean_se(std::span<const ErrorCounts> counts, Get get) {
  const auto n = static_cast<double>(counts.size());
  const double shift = get(counts.front());
  double sum = 0.0;
  for (const ErrorCounts& c : counts) sum += get(c) - shift;
  const double offset = sum / n;
  double ss = 0.0;
  for (const ErrorCounts& c : counts) {
    const double d = (get(c) - shift) - offset;
    ss += d * d;
  }
  return {shift + offset, std::sqrt(ss / n) / std::sqrt(n)};
}

}  // namespace

GroundTruth::GroundTruth(std::vector<std::string> null_ids, std::vector<std::string> alt_ids)
    : null_ids_(std::move(null_ids)),
      alt_ids_(std::move(alt_ids)),
      sorted_nulls_(null_ids_),
      sorted_alts_(alt_ids_) {
  std::sort(sorted_nulls_.begin(), sorted_nulls_.end());
  std::sort(sorted_alts_.begin(), sorted_alts_.end());
  if (std::adjacent_find(sorted_nulls_.begin(), sorted_nulls_.end()) != sorted_nulls_.end() ||
      std::adjacent_find(sorted_alts_.begin(), sorted_alts_.end()) != sorted_alts_.end()) {
    throw std::invalid_argument("ground truth ids must be unique");
  }
  for (const std::string& id : sorted_nulls_) {
    if (sorted_contains(sorted_alts_, id)) {
      throw std::invalid_argument("id '" + id + "' is both null and alternative");
    }
  }
}

bool GroundTruth::is_null(const std::string& id) const {
  return sorted_contains(sorted_nulls_, id);
}

bool GroundTruth::contains(const std::string& id) const {
  return is_null(id) || sorted_contains(sorted_alts_, id);
}

ErrorCounts count_errors(const ProcedureOutcome& outcome, const GroundTruth& truth) {
  std::size_t s0 = 0;
  for (const std::string& id : outcome.rejected) {
    if (!truth.contains(id)) {
      throw std::invalid_argument("rejected id '" + id + "' is not in the ground truth");
    }
    if (truth.is_null(id)) ++s0;
  }
  const std::size_t s = outcome.rejected.size();
  return make_counts(s0, s, truth.alt_ids().size(), s - s0);
}

ErrorCounts count_errors(std::span<const std::size_t> rejected_index,
                         const std::vector<bool>& is_null) {
  std::size_t s0 = 0;
  for (std::size_t m : rejected_index) {
    if (m >= is_null.size()) throw std::invalid_argument("rejected index outside the battery");
    if (is_null[m]) ++s0;
  }
  const auto alts = static_cast<std::size_t>(std::count(is_null.begin(), is_null.end(), false));
  const std::size_t s = rejected_index.size();
  return make_counts(s0, s, alts, s - s0);
}

RateEstimates estimate_rates(std::span<const ErrorCounts> counts) {
  if (counts.empty()) throw std::invalid_argument("estimate_rates: no replicates");
  RateEstimates r;
  const auto fwer = mean_se(counts, [](const ErrorCounts& c) { return c.s0 >= 1 ? 1.0 : 0.0; });
  const auto fdr = mean_se(counts, [](const ErrorCounts& c) { return c.fdp; });
  const auto mdr = mean_se(counts, [](const ErrorCounts& c) { return c.missed_prop; });
  r.fwer_hat = fwer.mean;
  r.se_fwer = fwer.se;
  r.fdr_hat = fdr.mean;
  r.se_fdr = fdr.se;
  r.mdr_hat = mdr.mean;
  r.se_mdr = mdr.se;
  r.replicates = counts.size();
  return r;
}

}  // namespace mdf

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdf/size_function.hpp"

namespace mdf {

// Malformed input file; carries the 1-based line number (0 when not tied to a line).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct TestRecord {
  std::string id;
  double p;
  std::optional<double> z;
};

// Ordinary p-values of a battery of tests. Each test's decision process is
// the unit step delta_m(u) = 1{P_m <= u}.
class TestBattery {
 public:
  TestBattery() = default;
  explicit TestBattery(std::vector<TestRecord> records);
  // Ids "t1".."tM".
  static TestBattery from_pvalues(std::span<const double> pvalues);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const TestRecord& operator[](std::size_t m) const { return records_[m]; }
  const std::vector<TestRecord>& records() const { return records_; }
  std::vector<double> pvalues() const;

 private:
  std::vector<TestRecord> records_;
};

// CSV with header `id,p[,z]`. Throws ParseError with the offending line.
TestBattery read_battery_csv(std::istream& in);
TestBattery read_battery_csv_file(const std::string& path);

// Turns a discrete test into one with an exactly uniform null p-value:
// p_minus + u * (p - p_minus), where p_minus is the left limit of the null
// tail probability at the observed statistic.
double randomized_pvalue(double p_minus, double p, double u);

struct DiscreteRecord {
  std::string id;
  double p_minus;
  double p;
};

// The auxiliary uniform for record m is a fixed function of (seed, m), so a
// dataset maps to the same battery every time it is ingested.
TestBattery randomize_discrete(std::span<const DiscreteRecord> records, std::uint64_t seed);

struct GeneralizedPValues {
  std::vector<double> alphas;
  // s_m = -log(1 - alpha_m). Ordering and the procedures work on this scale,
  // where generalized p-values that round to 1 remain distinct.
  std::vector<double> s;
  // 0-based; s[antirank[0]] <= s[antirank[1]] <= ...
  std::vector<std::size_t> antirank;

  std::size_t size() const { return alphas.size(); }
  // alpha_(j) for 1-based j, with alpha_(0) = 0 and alpha_(M+1) = 1.
  double ordered(std::size_t j) const;
  // s_(j), with s_(0) = 0 and s_(M+1) = inf.
  double ordered_s(std::size_t j) const;
};

// Stable: ties keep ascending original index.
std::vector<std::size_t> anti_ranks(std::span<const double> alphas);

GeneralizedPValues generalized_pvalues(std::span<const double> pvalues, const SizeFamily& family);
GeneralizedPValues generalized_pvalues(const TestBattery& battery, const SizeFamily& family);

}  // namespace mdf

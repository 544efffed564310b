#include "mdf/pvalues.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "mdf/random.hpp"

namespace mdf {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::optional<double> parse_double(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace

TestBattery::TestBattery(std::vector<TestRecord> records) : records_(std::move(records)) {
  std::unordered_set<std::string> seen;
  for (const TestRecord& r : records_) {
    if (!(r.p >= 0.0 && r.p <= 1.0)) {
      throw std::domain_error("test '" + r.id + "': p-value must lie in [0,1]");
    }
    if (!seen.insert(r.id).second) {
      throw std::invalid_argument("duplicate test id '" + r.id + "'");
    }
  }
}

TestBattery TestBattery::from_pvalues(std::span<const double> pvalues) {
  std::vector<TestRecord> records;
  records.reserve(pvalues.size());
  for (std::size_t m = 0; m < pvalues.size(); ++m) {
    records.push_back({"t" + std::to_string(m + 1), pvalues[m], std::nullopt});
  }
  return TestBattery(std::move(records));
}

std::vector<double> TestBattery::pvalues() const {
  std::vector<double> p(records_.size());
  std::transform(records_.begin(), records_.end(), p.begin(),
                 [](const TestRecord& r) { return r.p; });
  return p;
}

TestBattery read_battery_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing header `id,p[,z]`");
  ++line_no;
  std::string_view header = line;
  if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);
  const auto columns = split_commas(header);
  const bool has_z = columns.size() == 3 && columns[2] == "z";
  if (columns.size() < 2 || columns[0] != "id" || columns[1] != "p" ||
      (columns.size() == 3 && !has_z) || columns.size() > 3) {
    throw ParseError(1, "header must be `id,p` or `id,p,z`");
  }

  std::vector<TestRecord> records;
  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != columns.size()) {
      throw ParseError(line_no, "expected " + std::to_string(columns.size()) + " fields, found " +
                                    std::to_string(fields.size()));
    }
    TestRecord record;
    record.id = std::string(fields[0]);
    if (record.id.empty()) throw ParseError(line_no, "empty id");
    if (!seen.insert(record.id).second) {
      throw ParseError(line_no, "duplicate id '" + record.id + "'");
    }
    const auto p = parse_double(fields[1]);
    if (!p) throw ParseError(line_no, "p is not a number: '" + std::string(fields[1]) + "'");
    if (!(*p >= 0.0 && *p <= 1.0)) {
      throw ParseError(line_no, "p must lie in [0,1]: '" + std::string(fields[1]) + "'");
    }
    record.p = *p;
    if (has_z) {
      record.z = parse_double(fields[2]);
      if (!record.z) throw ParseError(line_no, "z is not a number: '" + std::string(fields[2]) + "'");
    }
    records.push_back(std::move(record));
  }
  if (records.empty()) throw ParseError(line_no + 1, "no data rows after the header");
  return TestBattery(std::move(records));
}

TestBattery read_battery_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  return read_battery_csv(in);
}

double randomized_pvalue(double p_minus, double p, double u) {
  if (!(p_minus >= 0.0 && p <= 1.0 && p_minus <= p)) {
    throw std::domain_error("randomized_pvalue: need 0 <= p_minus <= p <= 1");
  }
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("randomized_pvalue: u must lie in [0,1]");
  return p_minus + u * (p - p_minus);
}

TestBattery randomize_discrete(std::span<const DiscreteRecord> records, std::uint64_t seed) {
  std::vector<TestRecord> out;
  out.reserve(records.size());
  for (std::size_t m = 0; m < records.size(); ++m) {
    Stream stream(seed, m);
    const double u = stream.uniform();
    out.push_back({records[m].id, randomized_pvalue(records[m].p_minus, records[m].p, u),
                   std::nullopt});
  }
  return TestBattery(std::move(out));
}

double GeneralizedPValues::ordered(std::size_t j) const {
  if (j == 0) return 0.0;
  if (j > alphas.size()) return 1.0;
  return alphas[antirank[j - 1]];
}

double GeneralizedPValues::ordered_s(std::size_t j) const {
  if (j == 0) return 0.0;
  if (j > s.size()) return std::numeric_limits<double>::infinity();
  return s[antirank[j - 1]];
}

std::vector<std::size_t> anti_ranks(std::span<const double> alphas) {
  std::vector<std::size_t> order(alphas.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return alphas[a] < alphas[b]; });
  return order;
}

GeneralizedPValues generalized_pvalues(std::span<const double> pvalues, const SizeFamily& family) {
  if (pvalues.size() != family.size()) {
    throw std::invalid_argument("battery has " + std::to_string(pvalues.size()) +
                                " tests but the size family has M = " +
                                std::to_string(family.size()));
  }
  GeneralizedPValues gp;
  gp.alphas.resize(pvalues.size());
  gp.s.resize(pvalues.size());
  for (std::size_t m = 0; m < pvalues.size(); ++m) {
    const SizeFunction& f = family[m];
    double s = f.invert_s(pvalues[m]);
    // Rejection at equality must survive rounding: step up until A_m >= P_m.
    for (int step = 0; step < 64 && std::isfinite(s) && f.evaluate_s(s) < pvalues[m]; ++step) {
      s = std::nextafter(s, std::numeric_limits<double>::infinity());
    }
    gp.s[m] = s;
    gp.alphas[m] = -std::expm1(-s);
  }
  gp.antirank = anti_ranks(gp.s);
  return gp;
}

GeneralizedPValues generalized_pvalues(const TestBattery& battery, const SizeFamily& family) {
  return generalized_pvalues(battery.pvalues(), family);
}

}  // namespace mdf

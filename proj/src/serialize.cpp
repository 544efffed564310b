#include "mdf/serialize.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

namespace mdf {

namespace {

std::vector<Knot> knots_from_json(const Json& list) {
  if (!list.is_array()) throw std::invalid_argument("knots must be an array of [alpha, value]");
  std::vector<Knot> knots;
  for (const Json& pair : list) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
      throw std::invalid_argument("each knot must be a pair [alpha, value]");
    }
    knots.push_back({pair[0].get<double>(), pair[1].get<double>()});
  }
  return knots;
}

bool is_knot_pair(const Json& j) {
  return j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number();
}

std::size_t size_field(const Json& doc, const char* key) {
  const Json& v = doc.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw std::invalid_argument(std::string("'") + key + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

double number_field(const Json& doc, const char* key) {
  const Json& v = doc.at(key);
  if (!v.is_number()) throw std::invalid_argument(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

Json to_json(const SizeFamily& family) {
  Json doc;
  doc["kind"] = to_string(family.kind());
  doc["M"] = family.size();
  if (family.kind() == SizeKind::Weighted) {
    Json weights = Json::array();
    for (const SizeFunction& f : family.members()) weights.push_back(f.weight());
    doc["weights"] = std::move(weights);
  } else if (family.kind() == SizeKind::Tabulated) {
    Json knots = Json::array();
    for (const SizeFunction& f : family.members()) {
      Json member = Json::array();
      for (const Knot& k : f.knots()) member.push_back(Json::array({k.alpha, k.value}));
      knots.push_back(std::move(member));
    }
    doc["knots"] = std::move(knots);
  }
  return doc;
}

SizeFamily family_from_json(const Json& input) {
  try {
    const Json& doc = input.contains("family") ? input.at("family") : input;
    if (!doc.is_object()) throw std::invalid_argument("size family must be a JSON object");
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "sidak" || kind == "bonferroni") {
      const std::size_t m = size_field(doc, "M");
      if (m == 0) throw std::invalid_argument("'M' must be positive");
      return kind == "sidak" ? SizeFamily::sidak(m) : SizeFamily::bonferroni(m);
    }
    if (kind == "weighted") {
      const Json& list = doc.at("weights");
      if (!list.is_array() || list.empty()) {
        throw std::invalid_argument("'weights' must be a nonempty array");
      }
      std::vector<double> weights;
      for (const Json& w : list) {
        if (!w.is_number()) throw std::invalid_argument("weights must be numbers");
        weights.push_back(w.get<double>());
      }
      if (doc.contains("M") && size_field(doc, "M") != weights.size()) {
        throw std::invalid_argument("'M' does not match the number of weights");
      }
      return SizeFamily::weighted(weights);
    }
    if (kind == "tabulated") {
      const Json& list = doc.at("knots");
      if (!list.is_array() || list.empty()) throw std::invalid_argument("'knots' must be nonempty");
      std::vector<std::vector<Knot>> knots;
      if (is_knot_pair(list.front())) {
        const std::size_t m = size_field(doc, "M");
        if (m == 0) throw std::invalid_argument("'M' must be positive");
        knots.assign(m, knots_from_json(list));
      } else {
        for (const Json& member : list) knots.push_back(knots_from_json(member));
        if (doc.contains("M") && size_field(doc, "M") != knots.size()) {
          throw std::invalid_argument("'M' does not match the number of knot lists");
        }
      }
      return SizeFamily::tabulated(std::move(knots));
    }
    throw std::invalid_argument("unknown size family kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed size family: ") + e.what());
  } catch (const std::domain_error& e) {
    throw std::invalid_argument(std::string("malformed size family: ") + e.what());
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("'" + path + "' is not valid JSON: " + e.what());
  }
}

SizeFamily read_family_file(const std::string& path) { return family_from_json(read_json_file(path)); }

SizeFamily resolve_sizes(const std::string& source, std::size_t battery_size) {
  if (source == "sidak") return SizeFamily::sidak(battery_size);
  if (source == "bonferroni") return SizeFamily::bonferroni(battery_size);
  SizeFamily family = read_family_file(source);
  if (family.size() != battery_size) {
    throw std::invalid_argument("size family in '" + source + "' has M = " +
                                std::to_string(family.size()) + ", expected " +
                                std::to_string(battery_size));
  }
  return family;
}

Json to_json(const ValidationReport& report) {
  Json doc;
  doc["a1_pass"] = report.a1_pass;
  doc["a2_pass"] = report.a2_pass;
  doc["a3_pass"] = report.a3_pass;
  Json a4 = Json::object();
  for (const auto& [k, pass] : report.a4_pass_by_k) a4[std::to_string(k)] = pass;
  doc["a4_pass_by_k"] = std::move(a4);
  doc["worst_violation"] = {{"condition", to_string(report.worst_violation.condition)},
                            {"alpha", report.worst_violation.alpha},
                            {"magnitude", report.worst_violation.magnitude}};
  return doc;
}

Json to_json(const ProcedureOutcome& outcome) {
  Json doc;
  doc["procedure"] = to_string(outcome.procedure);
  doc["q"] = outcome.q;
  doc["J"] = outcome.J;
  doc["alpha_threshold"] = outcome.alpha_threshold;
  doc["alpha_interval"] = Json::array({outcome.interval_lo, outcome.interval_hi});
  doc["rejected"] = outcome.rejected;
  doc["sizes_at_threshold"] = outcome.sizes_at_threshold;
  return doc;
}

Json to_json(const RateEstimates& rates) {
  return Json{{"fwer_hat", rates.fwer_hat}, {"fdr_hat", rates.fdr_hat},
              {"mdr_hat", rates.mdr_hat},   {"se_fwer", rates.se_fwer},
              {"se_fdr", rates.se_fdr},     {"se_mdr", rates.se_mdr},
              {"replicates", rates.replicates}};
}

std::string to_string(Tail tail) { return tail == Tail::OneSided ? "one-sided" : "two-sided"; }

Tail parse_tail(const std::string& name) {
  if (name == "one-sided") return Tail::OneSided;
  if (name == "two-sided") return Tail::TwoSided;
  throw std::invalid_argument("unknown tail '" + name + "' (expected one-sided or two-sided)");
}

Json to_json(const SimConfig& config) {
  Json doc;
  doc["M"] = config.M;
  doc["m0"] = config.m0;
  doc["effects"] = config.effects;
  doc["alt_correlation"] = config.alt_correlation;
  doc["tail"] = to_string(config.tail);
  doc["q"] = config.q;
  doc["procedure"] = to_string(config.procedure);
  doc["size_family"] = to_json(config.family());
  doc["replicates"] = config.replicates;
  doc["seed"] = config.seed;
  doc["k_sigma"] = config.k_sigma;
  return doc;
}

SimConfig sim_config_from_json(const Json& doc) {
  try {
    if (!doc.is_object()) throw std::invalid_argument("simulation config must be a JSON object");
    SimConfig c;
    c.M = size_field(doc, "M");
    c.m0 = doc.contains("m0") ? size_field(doc, "m0") : c.M;
    if (c.m0 > c.M) throw std::invalid_argument("m0 must lie in 0..M");
    if (doc.contains("effects")) {
      const Json& e = doc.at("effects");
      if (e.is_number()) {
        c.effects.assign(c.M - c.m0, e.get<double>());
      } else {
        c.effects = e.get<std::vector<double>>();
      }
    }
    if (doc.contains("alt_correlation")) c.alt_correlation = number_field(doc, "alt_correlation");
    if (doc.contains("tail")) c.tail = parse_tail(doc.at("tail").get<std::string>());
    if (doc.contains("q")) c.q = number_field(doc, "q");
    if (doc.contains("procedure")) c.procedure = parse_procedure(doc.at("procedure").get<std::string>());
    if (doc.contains("size_family")) {
      const Json& f = doc.at("size_family");
      if (f.is_string()) {
        c.size_family = resolve_sizes(f.get<std::string>(), c.M);
      } else {
        c.size_family = family_from_json(f);
      }
    }
    if (doc.contains("replicates")) c.replicates = size_field(doc, "replicates");
    if (doc.contains("seed")) {
      const Json& s = doc.at("seed");
      if (!s.is_number_integer()) throw std::invalid_argument("'seed' must be an integer");
      c.seed = s.get<std::uint64_t>();
    }
    if (doc.contains("k_sigma")) c.k_sigma = number_field(doc, "k_sigma");
    validate_config(c);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed simulation config: ") + e.what());
  }
}

Json to_json(const SimResult& result) {
  Json doc;
  doc["config"] = to_json(result.config);
  doc["rates"] = to_json(result.rates);
  doc["pass_fwer"] = result.pass_fwer;
  doc["pass_fdr"] = result.pass_fdr;
  doc["k_sigma"] = result.k_sigma;
  return doc;
}

Json to_json(const WeightSolution& solution) {
  return Json{{"alpha", solution.alpha},
              {"weights", solution.weights},
              {"total_power", solution.total_power},
              {"kkt_residual", solution.kkt_residual}};
}

void write_replicates_csv(std::ostream& out, std::span<const ErrorCounts> counts) {
  out << "replicate,s0,s,fdp,missed_prop\n";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    // JSON number formatting is the shortest round-trip form.
    out << i << ',' << counts[i].s0 << ',' << counts[i].s << ',' << Json(counts[i].fdp).dump()
        << ',' << Json(counts[i].missed_prop).dump() << '\n';
  }
}

}  // namespace mdf

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "mdf/cli.hpp"
#include "mdf/serialize.hpp"
#include "mdf/size_function.hpp"

namespace fs = std::filesystem;
using namespace mdf;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::initializer_list<std::string> args) {
  std::vector<std::string> storage = {"mdf"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& s : storage) argv.push_back(s.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("mdf_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name, const std::string& content) const {
    const fs::path p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p.string();
  }
  std::string path(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kFour = "id,p\na,0.001\nb,0.013\nc,0.04\nd,0.2\n";

}  // namespace

TEST_CASE("test subcommand") {
  TempDir dir;
  const std::string csv = dir.file("four.csv", kFour);

  Run r = run({"test", "--input", csv, "--procedure", "star", "--q", "0.05"});
  REQUIRE(r.code == cli::kSuccess);
  Json doc = Json::parse(r.out);
  CHECK(doc["rejected"] == Json::array({"a", "b"}));
  CHECK(doc["J"] == 2);
  CHECK(doc["procedure"] == "star");
  CHECK(doc["alpha_interval"].size() == 2);
  CHECK(doc["sizes_at_threshold"].size() == 4);

  // Defaults: dagger at q = 0.05 with Sidak sizes.
  r = run({"test", "--input", csv});
  CHECK(r.code == 0);
  CHECK(Json::parse(r.out)["procedure"] == "dagger");

  r = run({"test", "--input", csv, "--procedure", "bh", "--q", "0"});
  CHECK(r.code == 0);
  CHECK(Json::parse(r.out)["rejected"].empty());
  r = run({"test", "--input", csv, "--q", "0"});
  CHECK(r.code == 0);
  CHECK(Json::parse(r.out)["J"] == 0);

  const std::string out = dir.path("result.json");
  r = run({"test", "--input", csv, "--output", out, "--emit-plot-data"});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  CHECK(Json::parse(slurp(out))["J"] == 2);
  std::istringstream plot(slurp(out + ".plot.csv"));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(plot, line)) lines.push_back(line);
  REQUIRE(lines.size() == 251);
  CHECK(lines[0] == "q,J");
  CHECK(lines[1] == "0.001,0");
  CHECK(lines[50] == "0.05,2");
  CHECK(lines[250].rfind("0.25,", 0) == 0);
}

TEST_CASE("test subcommand failures") {
  TempDir dir;
  const std::string csv = dir.file("four.csv", kFour);

  Run r = run({"test", "--input", dir.file("empty.csv", "id,p\n")});
  CHECK(r.code == cli::kParseError);
  CHECK(r.err.find("no data rows") != std::string::npos);

  r = run({"test", "--input", dir.file("bad.csv", "id,p\na,0.1\nb,oops\n")});
  CHECK(r.code == cli::kParseError);
  CHECK(r.err.find("line 3") != std::string::npos);

  CHECK(run({"test", "--input", csv, "--q", "1.5"}).code == cli::kConfigError);
  CHECK(run({"test", "--input", csv, "--procedure", "nope"}).code == cli::kConfigError);
  CHECK(run({"test"}).code == cli::kConfigError);
  CHECK(run({"test", "--input", dir.path("missing.csv")}).code == cli::kConfigError);
  CHECK(run({"test", "--input", csv, "--sizes", "bonferroni"}).code == cli::kConfigError);
  CHECK(run({"test", "--input", csv, "--sizes", "bonferroni", "--procedure", "bh"}).code == 0);
  CHECK(run({"test", "--input", csv, "--emit-plot-data"}).code == cli::kConfigError);
  CHECK(run({"test", "--input", csv, "--q", "abc"}).code == cli::kConfigError);
  CHECK(run({"frobnicate"}).code == cli::kConfigError);
  CHECK(run({}).code == cli::kConfigError);

  // A family file whose M does not match the battery.
  const std::string fam = dir.file("fam.json", R"({"kind":"sidak","M":3})");
  CHECK(run({"test", "--input", csv, "--sizes", fam}).code == cli::kConfigError);
  const std::string fam4 = dir.file("fam4.json", R"({"kind":"weighted","M":4,"weights":[0.4,0.3,0.2,0.1]})");
  CHECK(run({"test", "--input", csv, "--sizes", fam4}).code == 0);
}

TEST_CASE("simulate subcommand") {
  TempDir dir;
  const std::string cfg = dir.file("sim.json", R"({"M": 10, "m0": 5, "effects": 2.0, "q": 0.1,
      "procedure": "star", "replicates": 2000, "seed": 4})");
  const std::string out1 = dir.path("a.json");
  const std::string out2 = dir.path("b.json");
  Run r = run({"simulate", "--input", cfg, "--output", out1, "--threads", "1"});
  REQUIRE(r.code == cli::kSuccess);
  r = run({"simulate", "--input", cfg, "--output", out2, "--threads", "4"});
  REQUIRE(r.code == cli::kSuccess);
  CHECK(slurp(out1) == slurp(out2));

  const Json doc = Json::parse(slurp(out1));
  CHECK(doc["config"]["seed"] == 4);
  CHECK(doc["config"]["procedure"] == "star");
  CHECK(doc["rates"]["replicates"] == 2000);
  CHECK(doc["pass_fdr"] == true);
  CHECK(doc["k_sigma"] == 3.0);

  // Flags override the file.
  r = run({"simulate", "--input", cfg, "--seed", "11", "--q", "0.2", "--procedure", "bh"});
  REQUIRE(r.code == 0);
  const Json over = Json::parse(r.out);
  CHECK(over["config"]["seed"] == 11);
  CHECK(over["config"]["q"] == 0.2);
  CHECK(over["config"]["procedure"] == "bh");

  r = run({"simulate", "--input", cfg, "--output", out1, "--emit-plot-data"});
  CHECK(r.code == 0);
  const std::string reps = slurp(out1 + ".replicates.csv");
  CHECK(reps.rfind("replicate,s0,s,fdp,missed_prop\n", 0) == 0);
  CHECK(std::count(reps.begin(), reps.end(), '\n') == 2001);
}

TEST_CASE("simulate refusals and bound failures") {
  TempDir dir;
  const std::string broken = dir.file("broken.json", R"({"M": 4, "m0": 2, "effects": 2.0,
      "procedure": "star", "size_family": "bonferroni", "replicates": 100})");
  Run r = run({"simulate", "--input", broken});
  CHECK(r.code == cli::kConfigError);
  CHECK(r.err.find("A1") != std::string::npos);

  CHECK(run({"simulate", "--input", dir.file("m0.json", R"({"M": 4, "m0": 7})")}).code == cli::kConfigError);
  CHECK(run({"simulate", "--input", dir.file("junk.json", "{not json")}).code == cli::kConfigError);

  // With zero tolerance a small global-null run lands above q for some seeds.
  const std::string cfg = dir.file("null.json", R"({"M": 5, "procedure": "dagger", "q": 0.05,
      "replicates": 200, "k_sigma": 0})");
  int above = 0;
  int below = 0;
  for (int seed = 1; seed <= 40; ++seed) {
    const Run s = run({"simulate", "--input", cfg, "--seed", std::to_string(seed)});
    REQUIRE((s.code == cli::kSuccess || s.code == cli::kBoundFailed));
    const Json doc = Json::parse(s.out);
    const bool pass = doc["rates"]["fwer_hat"].get<double>() <= 0.05;
    CHECK(pass == (s.code == cli::kSuccess));
    (pass ? below : above) += 1;
  }
  CHECK(above > 0);
  CHECK(below > 0);
}

TEST_CASE("seed from the environment") {
  TempDir dir;
  const std::string cfg = dir.file("noseed.json", R"({"M": 3, "replicates": 50})");
  ::setenv("MDF_SEED", "123", 1);
  Run r = run({"simulate", "--input", cfg});
  CHECK(r.code == 0);
  CHECK(Json::parse(r.out)["config"]["seed"] == 123);
  r = run({"simulate", "--input", cfg, "--seed", "9"});
  CHECK(Json::parse(r.out)["config"]["seed"] == 9);
  const std::string seeded = dir.file("seeded.json", R"({"M": 3, "replicates": 50, "seed": 77})");
  CHECK(Json::parse(run({"simulate", "--input", seeded}).out)["config"]["seed"] == 77);
  ::setenv("MDF_SEED", "banana", 1);
  CHECK(run({"simulate", "--input", cfg}).code == cli::kConfigError);
  ::unsetenv("MDF_SEED");
  CHECK(Json::parse(run({"simulate", "--input", cfg}).out)["config"]["seed"] == 0);
}

TEST_CASE("optimize subcommand") {
  TempDir dir;
  Run r = run({"optimize", "--input", dir.file("equal.json", R"({"thetas": [2, 2, 2], "grid_size": 32})")});
  REQUIRE(r.code == cli::kSuccess);
  Json doc = Json::parse(r.out);
  CHECK(doc["validation"]["a1_pass"] == true);
  const SizeFamily fam = family_from_json(doc["family"]);
  CHECK(fam.kind() == SizeKind::Tabulated);
  for (double a : {0.001, 0.01, 0.05, 0.3}) {
    for (std::size_t m = 0; m < 3; ++m) CHECK(std::fabs(fam[m](a) - sidak_size(a, 3)) <= 1e-6);
  }
  CHECK(doc["solutions"].size() == 32);

  r = run({"optimize", "--input", dir.file("het.json", R"({"thetas": [3, 0.5]})")});
  CHECK(r.code == 0);
  CHECK(Json::parse(r.out)["validation"]["a3_pass"] == true);

  const std::string out = dir.path("one.json");
  r = run({"optimize", "--input", dir.file("one_in.json", R"({"thetas": [1.5], "grid": [)"
      "0.01,0.02,0.03,0.04,0.05,0.06,0.07,0.08,0.09,0.1,0.2,0.3,0.4,0.5,0.6,0.7]}"), "--output", out});
  CHECK(r.code == 0);
  const SizeFamily one = read_family_file(out);
  for (double a : {0.005, 0.05, 0.55, 0.9}) CHECK(one[0](a) == doctest::Approx(a).epsilon(1e-12));

  r = run({"optimize", "--input", dir.file("starved.json", R"({"thetas": [3, 0]})")});
  CHECK(r.code == cli::kOptimizerFailed);
  CHECK_FALSE(r.err.empty());
  CHECK(run({"optimize", "--input", dir.file("neg.json", R"({"thetas": [1, -1]})")}).code == cli::kConfigError);
  CHECK(run({"optimize", "--input", dir.file("nothetas.json", R"({"grid_size": 20})")}).code == cli::kConfigError);
  CHECK(run({"optimize", "--input", dir.file("short.json", R"({"thetas": [1, 2], "grid": [0.1, 0.2]})")}).code ==
        cli::kConfigError);
}

TEST_CASE("validate-sizes subcommand") {
  TempDir dir;
  Run r = run({"validate-sizes", "--input", dir.file("s.json", R"({"kind": "sidak", "M": 6})")});
  CHECK(r.code == cli::kSuccess);
  CHECK(Json::parse(r.out)["a4_pass_by_k"].size() == 6);

  r = run({"validate-sizes", "--input", dir.file("b.json", R"({"kind": "bonferroni", "M": 4})")});
  CHECK(r.code == cli::kValidationFailed);
  CHECK(Json::parse(r.out)["a1_pass"] == false);

  r = run({"validate-sizes", "--input", dir.file("w9.json", R"({"kind": "weighted", "M": 2, "weights": [0.5, 0.4]})")});
  CHECK(r.code == cli::kSuccess);
  const Json w9 = Json::parse(r.out);
  CHECK(w9["a3_pass"] == true);
  CHECK(w9["a4_pass_by_k"].contains("1"));
  CHECK(w9["a4_pass_by_k"].contains("2"));

  r = run({"validate-sizes", "--input", dir.file("w.json", R"({"kind": "weighted", "M": 2, "weights": [0.7, 0.3]})"),
           "--k-max", "2", "--grid-size", "501"});
  CHECK(r.code == cli::kSuccess);
  CHECK(Json::parse(r.out)["a4_pass_by_k"]["2"] == false);

  const std::string tab = dir.file("t.json", R"({"kind": "tabulated", "M": 2,
      "knots": [[[0.1, 0.06], [0.5, 0.3]], [[0.1, 0.04], [0.5, 0.25]]]})");
  CHECK(run({"validate-sizes", "--input", tab}).code == cli::kSuccess);

  CHECK(run({"validate-sizes", "--input", dir.file("bad.json", R"({"kind": "sidak"})")}).code == cli::kConfigError);
  CHECK(run({"validate-sizes", "--input", dir.file("kind.json", R"({"kind": "magic", "M": 2})")}).code ==
        cli::kConfigError);
  CHECK(run({"validate-sizes", "--input", dir.file("wbad.json", R"({"kind": "weighted", "M": 2, "weights": [0.5]})")})
            .code == cli::kConfigError);
  CHECK(run({"validate-sizes", "--input", dir.file("s2.json", R"({"kind": "sidak", "M": 2})"), "--k-max", "3"}).code ==
        cli::kConfigError);
}

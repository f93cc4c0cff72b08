#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gffpin/analytics.hpp"
#include "gffpin/experiments.hpp"
#include "gffpin/io.hpp"

using namespace gffpin;
namespace fs = std::filesystem;

namespace {
fs::path freshDir(const std::string& leaf) {
  const fs::path p = fs::temp_directory_path() / "gffpin_tests" / leaf;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::string s((std::istreambuf_iterator<char>(in)),
                std::istreambuf_iterator<char>());
  return s;
}

template <class Fn>
std::string messageOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  FAIL("expected an Error to be thrown");
  return {};
}
}  // namespace

TEST_CASE("doubles format shortest and round-trip exactly") {
  CHECK(formatDouble(0.1) == "0.1");
  CHECK(formatDouble(-0.0) == "-0");
  CHECK(formatDouble(2.0) == "2");
  for (double v : {0.1, -0.0, 1.0 / 3.0, 1e300, 1e-300, 6.02214076e23,
                   0.25273100985866300, -123456.789}) {
    const double back = std::strtod(formatDouble(v).c_str(), nullptr);
    CHECK(std::bit_cast<std::uint64_t>(back) == std::bit_cast<std::uint64_t>(v));
  }
}

TEST_CASE("csv writing and parsing invert each other") {
  CHECK(csvEscape("plain") == "plain");
  CHECK(csvEscape("a,b") == "\"a,b\"");
  CHECK(csvEscape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csvEscape("two\nlines") == "\"two\nlines\"");

  const fs::path dir = freshDir("csv");
  const std::vector<std::vector<std::string>> rows = {
      {"name", "value", "note"},
      {"alpha", "1.5", "plain"},
      {"comma,field", "-0", "quote \" inside"},
      {"multi\r\nline", "", "trailing"},
  };
  {
    CsvWriter w(dir / "t.csv");
    for (const auto& r : rows) w.writeRow(r);
    w.close();
  }
  const std::string raw = slurp(dir / "t.csv");
  CHECK(raw.find("\r\n") != std::string::npos);
  CHECK(readCsv(dir / "t.csv") == rows);
}

TEST_CASE("binary arrays round-trip bit for bit") {
  const fs::path dir = freshDir("bin");
  const std::vector<double> data = {0.0, -0.0, 1.5, 1e-300, -1e300,
                                    3.141592653589793};
  writeBinaryF64(dir / "a.f64", data);
  CHECK(fs::file_size(dir / "a.f64") == data.size() * 8);
  const std::vector<double> back = readBinaryF64(dir / "a.f64");
  REQUIRE(back.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    CHECK(std::bit_cast<std::uint64_t>(back[i]) ==
          std::bit_cast<std::uint64_t>(data[i]));

  std::ofstream bad(dir / "bad.f64", std::ios::binary);
  bad.write("123456789", 9);
  bad.close();
  CHECK_THROWS_AS(readBinaryF64(dir / "bad.f64"), Error);
}

TEST_CASE("configs reject unknown keys and missing fields by name") {
  const Json j = {{"alpha", 1}, {"beta", 2}};
  CHECK_NOTHROW(checkKeys(j, {"alpha", "beta", "gamma"}, "test"));
  const std::string msg =
      messageOf([&] { checkKeys(j, {"alpha"}, "test"); });
  CHECK(msg.find("beta") != std::string::npos);
  CHECK(msg.find("alpha") != std::string::npos);  // allowed list is echoed

  const std::string miss =
      messageOf([&] { requireField<int>(j, "gamma", "test"); });
  CHECK(miss.find("gamma") != std::string::npos);
  CHECK(requireField<int>(j, "alpha", "test") == 1);
  CHECK(optionalField<int>(j, "gamma", 7) == 7);

  const fs::path dir = freshDir("json");
  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK_THROWS_AS(loadJsonFile(dir / "broken.json"), Error);
  const Json round = {{"k", std::vector<double>{1.0, 0.5}}, {"s", "x"}};
  writeJsonFile(dir / "ok.json", round);
  CHECK(loadJsonFile(dir / "ok.json") == round);
}

TEST_CASE("experiment runs are deterministic and self-describing") {
  const fs::path root = freshDir("runs");
  Json cfg;
  cfg["experiment"] = "green-convergence";
  cfg["output_dir"] = (root / "g1").string();
  cfg["seed"] = 7;
  cfg["params"] = {{"offsets", std::vector<std::vector<int>>{
                                   {0, 0, 0}, {1, 0, 0}}},
                   {"max_edge", 64}};

  const RunResult r1 = runExperimentConfig(cfg);
  CHECK(fs::exists(root / "g1" / "green.csv"));
  CHECK(fs::exists(root / "g1" / "manifest.json"));
  REQUIRE(r1.outputs == std::vector<std::string>{"green.csv", "manifest.json"});

  // The CSV carries the advertised header and accurate values.
  const auto rows = readCsv(root / "g1" / "green.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"dx0", "dx1", "dx2", "value",
                                            "error_estimate", "largest_edge"});
  const double v0 = std::strtod(rows[1][3].c_str(), nullptr);
  const double v1 = std::strtod(rows[2][3].c_str(), nullptr);
  CHECK(std::fabs(v0 - kVariance3d) < 1e-4);
  CHECK(std::fabs(v1 - (kVariance3d - 1.0 / 6.0)) < 2e-4);

  // The manifest alone reproduces the data bytes.
  const Json manifest = loadJsonFile(root / "g1" / "manifest.json");
  CHECK(manifest.at("format") == "run-manifest");
  CHECK(manifest.at("config") == cfg);
  Json again = manifest.at("config");
  again["output_dir"] = (root / "g2").string();
  runExperimentConfig(again);
  CHECK(slurp(root / "g2" / "green.csv") == slurp(root / "g1" / "green.csv"));

  // Unknown names fail loudly.
  Json bad = cfg;
  bad["experiment"] = "does-not-exist";
  const std::string msg = messageOf([&] { runExperimentConfig(bad); });
  CHECK(msg.find("does-not-exist") != std::string::npos);
  CHECK(msg.find("green-convergence") != std::string::npos);
  Json badKey = cfg;
  badKey["typo_key"] = 1;
  CHECK_THROWS_AS(runExperimentConfig(badKey), Error);
  Json badParam = cfg;
  badParam["params"]["bogus"] = 1;
  CHECK_THROWS_AS(runExperimentConfig(badParam), Error);
}

TEST_CASE("density sweep output matches the direct computation") {
  const fs::path root = freshDir("pstar");
  Json cfg;
  cfg["experiment"] = "pstar-sweep";
  cfg["output_dir"] = (root / "run").string();
  cfg["params"] = {{"law", "normal"},
                   {"beta", 1.0},
                   {"strengths", std::vector<double>{1e-2, 1e-3}}};
  runExperimentConfig(cfg);

  const auto rows = readCsv(root / "run" / "pstar.csv");
  REQUIRE(rows.size() == 3);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double h = std::strtod(rows[k][0].c_str(), nullptr);
    const OptimalDensity od = optimalDensity(DisorderLaw::Normal, 1.0, h);
    CHECK(rows[k][1] == formatDouble(od.p));
    CHECK(std::fabs(std::strtod(rows[k][4].c_str(), nullptr)) < 1e-6);
    CHECK(std::fabs(std::strtod(rows[k][5].c_str(), nullptr)) < 1e-9);
  }
  const auto sum = readCsv(root / "run" / "summary.csv");
  REQUIRE(sum.size() == 2);
  CHECK(sum[1][0] == formatDouble(chi(DisorderLaw::Normal, 1.0)));
  CHECK(std::strtod(sum[1][4].c_str(), nullptr) < 0.05);

  // Window-center sweep columns come from the same scalar functions.
  Json ucfg;
  ucfg["experiment"] = "uh-sweep";
  ucfg["output_dir"] = (root / "uh").string();
  ucfg["params"] = {{"law", "normal"},
                    {"beta", 1.0},
                    {"strengths", std::vector<double>{0.1, 0.01}}};
  runExperimentConfig(ucfg);
  const auto uh = readCsv(root / "uh" / "uh.csv");
  REQUIRE(uh.size() == 3);
  const double sigma2 = infiniteVolumeVariance(3);
  CHECK(std::fabs(sigma2 - kVariance3d) < 1e-4);
  CHECK(uh[1][1] ==
        formatDouble(shiftHeight(sigma2, DisorderLaw::Normal, 1.0, 0.1)));
  CHECK(uh[2][5] == formatDouble(disorderCutoff(DisorderLaw::Normal, 0.01)));
}

TEST_CASE("bounds suite reports every inequality as holding") {
  const fs::path root = freshDir("bounds");
  Json cfg;
  cfg["experiment"] = "bounds-suite";
  cfg["output_dir"] = (root / "run").string();
  cfg["seed"] = 3;
  cfg["params"] = {{"law", "normal"},
                   {"beta", 1.0},
                   {"strengths", std::vector<double>{0.1}},
                   {"clamp_draws", 5},
                   {"clamp_strength", 0.05}};
  runExperimentConfig(cfg);

  const auto cut = readCsv(root / "run" / "cutoffs.csv");
  REQUIRE(cut.size() == 2);
  CHECK(cut[1][4] == "1");
  const auto clamp = readCsv(root / "run" / "clamp.csv");
  REQUIRE(clamp.size() == 3);
  for (std::size_t k = 1; k < clamp.size(); ++k) {
    CHECK(clamp[k][2] == "1");
    const double meanAbs = std::strtod(clamp[k][3].c_str(), nullptr);
    const double envelope = std::strtod(clamp[k][4].c_str(), nullptr);
    CHECK(meanAbs <= envelope + 1e-12);
  }
  const auto bn = readCsv(root / "run" / "binomial.csv");
  REQUIRE(bn.size() == 7);
  for (std::size_t k = 1; k < bn.size(); ++k) CHECK(bn[k][6] == "1");
}

TEST_CASE("self-verification suites pass and reject unknown names") {
  const VerifyReport scalars = runVerifySuite("scalars");
  CHECK(scalars.failures == 0);
  REQUIRE(!scalars.lines.empty());
  for (const auto& line : scalars.lines)
    CHECK(line.rfind("[PASS]", 0) == 0);

  const VerifyReport sampler = runVerifySuite("sampler");
  CHECK(sampler.failures == 0);

  const VerifyReport hier = runVerifySuite("hierarchy");
  CHECK(hier.failures == 0);

  CHECK_THROWS_AS(runVerifySuite("bogus"), Error);
}

TEST_CASE("tables aggregate manifests under a directory") {
  const fs::path root = freshDir("tables");
  for (int k = 0; k < 2; ++k) {
    Json cfg;
    cfg["experiment"] = "hierarchy-verify";
    cfg["output_dir"] = (root / ("run" + std::to_string(k))).string();
    cfg["params"] = {{"edge", 86 + 14 * k}, {"h", 0.3}};
    runExperimentConfig(cfg);
  }
  const int found = writeTables(root);
  CHECK(found == 2);
  const auto index = readCsv(root / "index.csv");
  REQUIRE(index.size() == 3);
  CHECK(index[0][0] == "run_dir");
  CHECK(index[1][1] == "hierarchy-verify");
  const std::string md = slurp(root / "tables.md");
  CHECK(md.find("## run0 (hierarchy-verify)") != std::string::npos);
  CHECK(md.find("levels.csv") != std::string::npos);
  CHECK(md.find("| level |") != std::string::npos);
}

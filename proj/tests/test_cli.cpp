// End-to-end checks of the xhinge executable.
#include "io.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

using namespace xhinge;
namespace fs = std::filesystem;
using io::json;

namespace {

const fs::path kData = XHINGE_DATA_DIR;

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("xhinge_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override {
    if (!HasFailure()) fs::remove_all(dir_);
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  CliResult cli(const std::string& args) {
    const auto out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = std::string("\"") + XHINGE_CLI + "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  fs::path dir_;
};

// Small, fast optimizer settings.
const std::string kTiny = "--elements 8 --steps 8 --seed 5";

std::string design_arg(const DesignVector& d) {
  std::string s;
  for (double v : d.to_array()) s += (s.empty() ? "" : ",") + io::format_double(v);
  return "--design " + s;
}

} // namespace

TEST_F(CliTest, EvaluateMatchesGolden) {
  const json golden = io::read_json(kData / "cross_hinge_golden.json");
  const auto r = cli("--elements 60 --out " + dir_.string() + " evaluate --design-csv " +
                     (kData / "cross_hinge.csv").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const json got = json::parse(r.out);
  EXPECT_TRUE(got.at("feasible").get<bool>());
  for (const char* k : {"r_bar", "c_bar", "k_bar"}) {
    const double want = golden.at(k).get<double>();
    EXPECT_NEAR(got.at(k).get<double>(), want, 1e-12 * std::abs(want)) << k;
  }
}

TEST_F(CliTest, TraceMatchesGoldenSteps) {
  const json golden = io::read_json(kData / "cross_hinge_golden.json");
  const auto trace = path("trace.json");
  const auto r = cli("--elements 60 --out " + dir_.string() + " evaluate --design-csv " +
                     (kData / "cross_hinge.csv").string() + " --trace " + trace.string());
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_TRUE(fs::exists(trace));
  const json t = io::read_json(trace);
  const auto& steps = t.at("steps");
  ASSERT_EQ(steps.size(), golden.at("steps").size());
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const auto& g = golden.at("steps")[k];
    EXPECT_NEAR(steps[k].at("phi").get<double>(), g.at("phi").get<double>(), 1e-15);
    EXPECT_NEAR(steps[k].at("M").get<double>(), g.at("M").get<double>(), 1e-12 * 5e-5);
    for (int i = 0; i < 2; ++i)
      EXPECT_NEAR(steps[k].at("x_A")[i].get<double>(), g.at("x_A")[i].get<double>(), 1e-12);
    EXPECT_EQ(steps[k].at("nodes").size(), 2u);
    EXPECT_EQ(steps[k].at("K_t").size(), 2u);
  }
  EXPECT_EQ(t.at("reference").size(), 2u);
}

TEST_F(CliTest, OutOfBoundsDesignExitsWithTwoAndNamesBound) {
  auto d = classical_cross_hinge();
  d.beta2 = 35.0;
  const auto r = cli("--out " + dir_.string() + " evaluate " + design_arg(d));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("beta2"), std::string::npos) << r.err;
}

TEST_F(CliTest, MalformedInputIsAnError) {
  std::ofstream(path("bad.csv")) << "theta0_1,alpha\n1.0\n";
  EXPECT_EQ(cli("--out " + dir_.string() + " evaluate --design-csv " + path("bad.csv").string()).code, 1);
  EXPECT_EQ(cli("--out " + dir_.string() + " evaluate --design 1,2,3").code, 1);
  EXPECT_NE(cli("--out " + dir_.string() + " evaluate --bogus").code, 0);
  EXPECT_NE(cli("").code, 0);
}

TEST_F(CliTest, InfeasibleDesignReportedNotFailed) {
  const auto r = cli("--strain-limit 1e-9 --elements 8 --steps 8 --out " + dir_.string() + " evaluate " +
                     design_arg(classical_cross_hinge()));
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_FALSE(j.at("feasible").get<bool>());
  EXPECT_GT(j.at("violation").get<double>(), 0.0);
  EXPECT_TRUE(j.at("r_bar").is_null());
}

TEST_F(CliTest, OptimizeIsDeterministicAcrossRunsAndWorkers) {
  const std::string common = kTiny + " optimize --pop 8 --gens 3";
  ASSERT_EQ(cli("--out " + path("a").string() + " " + common).code, 0);
  ASSERT_EQ(cli("--out " + path("b").string() + " " + common).code, 0);
  ASSERT_EQ(cli("--workers 3 --out " + path("c").string() + " " + common).code, 0);
  const std::string a = slurp(path("a/archive.csv"));
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(path("b/archive.csv")));
  EXPECT_EQ(a, slurp(path("c/archive.csv")));
  EXPECT_EQ(slurp(path("a/archive.json")), slurp(path("c/archive.json")));
  EXPECT_EQ(slurp(path("a/progress.log")), slurp(path("b/progress.log")));
}

TEST_F(CliTest, OptimizeProgressLinesAndOutputs) {
  const auto r = cli("--out " + dir_.string() + " " + kTiny + " optimize --algorithm spea2 --pop 8 --gens 3");
  ASSERT_EQ(r.code, 0) << r.err;
  const std::regex line(R"(gen (\d+) feasible (\d+) archive (\d+) hv (\S+))");
  std::istringstream in(slurp(path("progress.log")));
  std::string l;
  int gens = 0;
  double last_hv = 0.0;
  while (std::getline(in, l)) {
    std::smatch m;
    ASSERT_TRUE(std::regex_match(l, m, line)) << l;
    EXPECT_EQ(std::stoi(m[1]), gens);
    const double hv = io::parse_double(m[4].str());
    EXPECT_GE(hv, last_hv);
    last_hv = hv;
    ++gens;
  }
  EXPECT_EQ(gens, 4);
  EXPECT_NE(r.out.find("gen 3 feasible"), std::string::npos);
  const auto archive = io::read_archive(path("archive.csv"));
  for (const auto& e : archive.entries)
    for (const auto& o : archive.entries) EXPECT_FALSE(dominates(o.y, e.y));
}

TEST_F(CliTest, MergeEqualsNondominatedUnion) {
  ASSERT_EQ(cli("--out " + path("n").string() + " " + kTiny + " optimize --algorithm nsga2 --pop 8 --gens 3").code, 0);
  ASSERT_EQ(cli("--out " + path("s").string() + " " + kTiny + " optimize --algorithm spea2 --pop 8 --gens 3").code, 0);
  const auto r = cli("--out " + path("m").string() + " merge " + path("n/archive.csv").string() + " " +
                     path("s/archive.csv").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto a = io::read_archive(path("n/archive.csv"));
  const auto b = io::read_archive(path("s/archive.csv"));
  const auto m = io::read_archive(path("m/merged.csv"));
  std::vector<std::vector<double>> ys;
  for (const auto& e : a.entries) ys.push_back(e.y);
  for (const auto& e : b.entries) ys.push_back(e.y);
  std::set<std::vector<double>> expected, got;
  for (std::size_t i : oracle::nondominated_indices(ys)) expected.insert(ys[i]);
  for (const auto& e : m.entries) got.insert(e.y);
  EXPECT_EQ(got, expected);
  ParetoArchive check = m;
  check.recompute_bounds();
  EXPECT_EQ(check.ideal, m.ideal);
  EXPECT_EQ(check.nadir, m.nadir);
}

TEST_F(CliTest, NoFeasibleDesignsExitsWithThree) {
  const auto r = cli("--strain-limit 1e-9 --out " + dir_.string() + " " + kTiny + " optimize --pop 4 --gens 1");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("no feasible designs"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(path("archive.csv")));
  EXPECT_TRUE(fs::exists(path("manifest_optimize.json")));
}

TEST_F(CliTest, BoundOverridesValidated) {
  auto r = cli("--out " + dir_.string() + " " + kTiny + " optimize --pop 4 --gens 1 --bound beta1=2:30");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("beta1"), std::string::npos);
  r = cli("--out " + dir_.string() + " " + kTiny + " optimize --pop 4 --gens 1 --bound nosuch=0:1");
  EXPECT_EQ(r.code, 1);
  r = cli("--out " + dir_.string() + " " + kTiny + " optimize --pop 4 --gens 1 --bound beta1=19:20 --bound beta2=19:20");
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& e : io::read_archive(path("archive.csv")).entries) {
    EXPECT_GE(e.x[9], 19.0);
    EXPECT_GE(e.x[10], 19.0);
  }
}

TEST_F(CliTest, SelectMapsTargetsToSelectedRows) {
  const auto r = cli("--out " + dir_.string() + " select " + (kData / "selected_rows.csv").string() +
                     " --target-weights 0.333,0.333,0.334 --target-weights 0.8,0.1,0.1"
                     " --target-weights 0.1,0.8,0.1 --target-weights 0.1,0.1,0.8");
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  ASSERT_EQ(j.at("selections").size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(j.at("selections")[k].at("row").get<std::size_t>(), k);
  const auto pw = j.at("selections")[2].at("pseudo_weights").get<std::vector<double>>();
  EXPECT_NEAR(pw[0], 0.098, 5e-4);
  EXPECT_NEAR(pw[1], 0.767, 5e-4);
  EXPECT_NEAR(pw[2], 0.135, 5e-4);
  EXPECT_EQ(j.at("pseudo_weight_table").size(), 4u);
  EXPECT_EQ(io::read_json(path("selection.json")), j);
  EXPECT_EQ(r.err.find("warning"), std::string::npos);
}

TEST_F(CliTest, SelectDefaultsToUniformAndNormalizesWithWarning) {
  auto r = cli("--out " + dir_.string() + " select " + (kData / "selected_rows.csv").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out).at("selections")[0].at("row").get<std::size_t>(), 0u);

  r = cli("--out " + dir_.string() + " select " + (kData / "selected_rows.csv").string() + " --target-weights 8,1,1");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  const json j = json::parse(r.out);
  const auto t = j.at("selections")[0].at("target").get<std::vector<double>>();
  EXPECT_NEAR(t[0], 0.8, 1e-15);
  EXPECT_NEAR(t[1], 0.1, 1e-15);
  EXPECT_EQ(j.at("selections")[0].at("row").get<std::size_t>(), 1u);

  EXPECT_EQ(cli("--out " + dir_.string() + " select " + (kData / "selected_rows.csv").string() +
                " --target-weights 0,0,0")
                .code,
            1);
}

TEST_F(CliTest, SelectOnEmptyArchiveIsAnError) {
  io::CsvTable t;
  for (auto c : kDesignColumns) t.header.emplace_back(c);
  for (auto c : io::kObjectiveColumns) t.header.emplace_back(c);
  io::write_csv(path("empty.csv"), t);
  const auto r = cli("--out " + dir_.string() + " select " + path("empty.csv").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("empty"), std::string::npos) << r.err;
}

TEST_F(CliTest, FrontExportsNormalizedColumns) {
  const auto r = cli("--out " + dir_.string() + " front " + (kData / "selected_rows.csv").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = io::read_csv(path("front.csv"));
  ASSERT_EQ(t.rows.size(), 4u);
  const auto wr = static_cast<std::size_t>(t.column("w_r"));
  EXPECT_NEAR(t.rows[0][wr], 0.328, 5e-4);
  EXPECT_NEAR(t.rows[0][wr + 1], 0.338, 5e-4);
}

TEST_F(CliTest, RenderOneFilePerRowWithHeightScaledStrokes) {
  std::vector<DesignVector> designs;
  for (double beta : {10.0, 20.0}) {
    auto d = classical_cross_hinge(beta);
    d.beta2 = beta / 2.0; // h2 = 2 h1
    designs.push_back(d);
  }
  designs.push_back(sample_random(11));
  io::write_designs(path("designs.csv"), designs);
  auto r = cli("--out " + path("svg").string() + " render --all --design-csv " + path("designs.csv").string());
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* name : {"design_0000.svg", "design_0001.svg", "design_0002.svg"})
    EXPECT_TRUE(fs::exists(path("svg") / name)) << name;
  EXPECT_FALSE(fs::exists(path("svg/design_0003.svg")));

  const std::regex re("stroke-width=\"([^\"]+)\"");
  const std::string svg0 = slurp(path("svg/design_0000.svg"));
  std::vector<double> widths;
  for (auto it = std::sregex_iterator(svg0.begin(), svg0.end(), re); it != std::sregex_iterator(); ++it)
    widths.push_back(std::stod((*it)[1]));
  ASSERT_EQ(widths.size(), 2u);
  EXPECT_NEAR(widths[1] / widths[0], 2.0, 1e-9);
  EXPECT_NE(svg0.find("<polyline"), std::string::npos);

  // deterministic names and bytes; --row picks one file
  const std::string before = slurp(path("svg/design_0001.svg"));
  r = cli("--out " + path("svg").string() + " render --row 1 --design-csv " + path("designs.csv").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("svg/design_0001.svg")), before);
}

TEST_F(CliTest, RenderWithTraceDrawsTwoLayers) {
  const auto trace = path("trace.json");
  ASSERT_EQ(cli("--elements 8 --steps 6 --out " + dir_.string() + " evaluate --design-csv " +
                (kData / "cross_hinge.csv").string() + " --trace " + trace.string())
                .code,
            0);
  const auto r = cli("--out " + dir_.string() + " render --design-csv " + (kData / "cross_hinge.csv").string() +
                     " --trace " + trace.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string svg = slurp(path("design_0000.svg"));
  const auto ref = svg.find("id=\"reference\" fill=\"none\" stroke=\"#999999\"");
  const auto def = svg.find("id=\"deformed\" fill=\"none\" stroke=\"black\"");
  EXPECT_NE(ref, std::string::npos);
  EXPECT_NE(def, std::string::npos);
  EXPECT_LT(ref, def);
}

TEST_F(CliTest, RefineDoesNotIncreaseScalar) {
  ASSERT_EQ(cli("--out " + dir_.string() + " " + kTiny + " optimize --pop 8 --gens 2").code, 0);
  const auto r = cli("--out " + dir_.string() + " " + kTiny + " refine --archive " + path("archive.csv").string() +
                     " --target-weights 1,1,1 --iterations 5");
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = io::read_json(path("refined.json"));
  EXPECT_LE(j.at("after").at("scalar").get<double>(), j.at("before").at("scalar").get<double>());
  EXPECT_TRUE(j.at("after").at("objectives").at("feasible").get<bool>());
  EXPECT_EQ(j.at("iterations").get<int>(), 5);
  EXPECT_EQ(j.at("weights").size(), 3u);
  EXPECT_NE(r.err.find("warning"), std::string::npos); // 1,1,1 normalized

  EXPECT_EQ(cli("--out " + dir_.string() + " refine --row 0").code, 1); // no archive
}

TEST_F(CliTest, ManifestRecordsHashesAndReplays) {
  const auto r = cli("--out " + path("first").string() + " " + kTiny + " optimize --pop 8 --gens 2");
  ASSERT_EQ(r.code, 0) << r.err;
  const json m = io::read_json(path("first/manifest_optimize.json"));
  EXPECT_EQ(m.at("command"), "optimize");
  EXPECT_EQ(m.at("seed").get<std::uint64_t>(), 5u);
  EXPECT_TRUE(m.at("versions").contains("eigen"));
  bool saw_archive = false;
  for (const auto& o : m.at("outputs")) {
    const fs::path p = o.at("path").get<std::string>();
    EXPECT_EQ(o.at("sha256").get<std::string>(), io::sha256_file(p)) << p;
    saw_archive = saw_archive || p.filename() == "archive.csv";
  }
  EXPECT_TRUE(saw_archive);

  // replay the stored configuration into another directory
  const auto ini = path("first/manifest_optimize.ini");
  ASSERT_TRUE(fs::exists(ini));
  EXPECT_EQ(m.at("config").get<std::string>(), slurp(ini));
  const auto replay = cli("--config " + ini.string() + " --out " + path("second").string());
  ASSERT_EQ(replay.code, 0) << replay.err;
  EXPECT_EQ(slurp(path("first/archive.csv")), slurp(path("second/archive.csv")));

  // input hashes
  const auto s = cli("--out " + path("sel").string() + " select " + (kData / "selected_rows.csv").string());
  ASSERT_EQ(s.code, 0);
  const json ms = io::read_json(path("sel/manifest_select.json"));
  ASSERT_EQ(ms.at("inputs").size(), 1u);
  EXPECT_EQ(ms.at("inputs")[0].at("sha256").get<std::string>(), io::sha256_file(kData / "selected_rows.csv"));
}

TEST_F(CliTest, ConfigFileDrivesOptimize) {
  std::ofstream(path("run.ini")) << "seed=5\nelements=8\nsteps=8\nout=\"" << path("cfg").string()
                                 << "\"\n[optimize]\npop=8\ngens=2\nalgorithm=\"spea2\"\n";
  const auto a = cli("--config " + path("run.ini").string());
  ASSERT_EQ(a.code, 0) << a.err;
  const auto b = cli("--out " + path("cli").string() + " " + kTiny + " optimize --algorithm spea2 --pop 8 --gens 2");
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(slurp(path("cfg/archive.csv")), slurp(path("cli/archive.csv")));
}

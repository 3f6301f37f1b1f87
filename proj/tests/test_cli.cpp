#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "occlusim/geometry.hpp"
#include "oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace occlusim;

namespace {

struct Result {
  int status = -1;
  std::string out;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           ("occlusim_cli_" + std::to_string(::getpid()) + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the CLI inside the test directory; stderr is discarded.
  Result run(const std::string& args) const {
    const std::string cmd =
        "cd '" + dir_.string() + "' && '" + OCCLUSIM_CLI + "' " + args + " 2>/dev/null";
    Result r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int raw = ::pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  void write(const std::string& name, const std::string& text) const {
    fs::create_directories(path(name).parent_path());
    std::ofstream(path(name)) << text;
  }
  void write(const std::string& name, const json& j) const { write(name, j.dump()); }

  std::string read(const std::string& name) const {
    std::ifstream in(path(name));
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
};

json small_config(const std::string& strategy = "rdw") {
  return {{"strategy", strategy},
          {"seed", 3},
          {"n_trials", 5},
          {"output_dir", "out"},
          {"scene", {{"extent", {80, 60}}, {"tree_count", 300}, {"target_count", 6}}}};
}

std::vector<std::vector<std::string>> csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  ADD_FAILURE() << "no column " << name;
  return 0;
}

json scene_file(const std::vector<std::array<double, 3>>& trees) {
  json t = json::array();
  for (const auto& c : trees) t.push_back({c[0], c[1], c[2]});
  return {{"bounds", {100, 100}}, {"trees", t}, {"targets", json::array()}};
}

}  // namespace

TEST_F(Cli, GenerateWritesAScene) {
  write("scene.json", json{{"extent", {80, 60}}, {"tree_count", 300}, {"target_count", 6}, {"seed", 2}});
  const Result r = run("generate scene.json forest.json");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("trees: 300"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("density: 625 trees/ha"), std::string::npos) << r.out;
  const json scene = json::parse(read("forest.json"));
  EXPECT_EQ(scene["trees"].size(), 300u);
  EXPECT_EQ(scene["targets"].size(), 6u);
  EXPECT_FALSE(fs::exists(path("forest.json.tmp")));
}

TEST_F(Cli, GenerateFailures) {
  // 5000 * pi * 2^2 > 4 * 80 * 60: no packing can satisfy the spacing.
  write("packed.json", json{{"extent", {80, 60}}, {"tree_count", 5000}, {"min_spacing", 2.0}});
  EXPECT_EQ(run("generate packed.json forest.json").status, 3);
  EXPECT_EQ(run("generate missing.json forest.json").status, 2);
  write("broken.json", std::string("{\"extent\": [80,"));
  EXPECT_EQ(run("generate broken.json forest.json").status, 2);
  write("unknown.json", json{{"extent", {80, 60}}, {"trees", 3}});
  EXPECT_EQ(run("generate unknown.json forest.json").status, 2);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").status, 2);
  EXPECT_EQ(run("fly").status, 2);
  write("run.json", small_config());
  EXPECT_EQ(run("run run.json --strategy both").status, 2);
  EXPECT_EQ(run("run run.json --n-trials x").status, 2);
}

TEST_F(Cli, RunIsReproducible) {
  write("run.json", small_config());
  ASSERT_EQ(run("run run.json").status, 0);
  const std::string first = read("out/trace.jsonl");
  const std::string summary = read("out/summary.csv");
  ASSERT_EQ(run("run run.json").status, 0);
  EXPECT_EQ(read("out/trace.jsonl"), first);
  EXPECT_EQ(read("out/summary.csv"), summary);
  ASSERT_EQ(run("run run.json --seed 4").status, 0);
  EXPECT_NE(read("out/trace.jsonl"), first);
  for (const auto& e : fs::directory_iterator(path("out"))) {
    EXPECT_NE(e.path().extension(), ".tmp") << e.path();
  }
}

TEST_F(Cli, TraceHasHeaderAndFooter) {
  write("run.json", small_config());
  ASSERT_EQ(run("run run.json --strategy atr").status, 0);
  std::istringstream in(read("out/trace.jsonl"));
  std::string line, last;
  std::getline(in, line);
  const json header = json::parse(line);
  EXPECT_EQ(header["type"], "header");
  EXPECT_EQ(header["format"], "occlusim-trace");
  EXPECT_EQ(header["strategy"], "atr");
  EXPECT_EQ(header["config"]["strategy"], "atr");  // flags override the file
  EXPECT_FALSE(header["version"].get<std::string>().empty());
  while (std::getline(in, line)) last = line;
  const json footer = json::parse(last);
  EXPECT_EQ(footer["type"], "footer");
  EXPECT_EQ(footer["trials"], 5);
  EXPECT_EQ(footer["final_mapping"].size(), 3u);
}

TEST_F(Cli, StrategiesDifferOnlyInAdjustmentColumns) {
  write("run.json", small_config());
  ASSERT_EQ(run("run run.json --strategy rdw --output-dir rdw").status, 0);
  ASSERT_EQ(run("run run.json --strategy atr --output-dir atr").status, 0);
  const auto a = csv(read("rdw/summary.csv"));
  const auto b = csv(read("atr/summary.csv"));
  ASSERT_EQ(a.size(), b.size());
  ASSERT_EQ(a[0], b[0]);
  const std::set<std::string> may_differ{"occluded_at_survey_end", "teleport_adjustment_total_deg",
                                         "redirect_rotation_total_deg"};
  for (std::size_t row = 1; row < a.size(); ++row) {
    for (std::size_t col = 0; col < a[0].size(); ++col) {
      if (may_differ.count(a[0][col])) continue;
      EXPECT_EQ(a[row][col], b[row][col]) << a[0][col] << " row " << row;
    }
  }
  // Each strategy only writes its own adjustment column.
  const std::size_t tele = column(a[0], "teleport_adjustment_total_deg");
  const std::size_t redir = column(a[0], "redirect_rotation_total_deg");
  for (std::size_t row = 1; row < a.size(); ++row) {
    EXPECT_EQ(a[row][tele], "0");
    EXPECT_EQ(b[row][redir], "0");
  }
}

TEST_F(Cli, CsvAndJsonAgree) {
  write("run.json", small_config());
  ASSERT_EQ(run("run run.json --n-trials 6").status, 0);
  const auto table = csv(read("out/summary.csv"));
  const json j = json::parse(read("out/summary.json"));
  ASSERT_EQ(table.size(), j["rows"].size() + 1);
  const auto& head = table[0];
  const std::vector<std::pair<std::string, std::string>> pairs{
      {"travel_time", "travel_time"},
      {"survey_time", "survey_time"},
      {"teleport_adjustment_total_deg", "teleport_adjustment_total_deg"},
      {"redirect_rotation_total_deg", "redirect_rotation_total_deg"},
      {"pointing_signed_error_deg", "pointing_signed_error_deg"}};
  for (std::size_t i = 0; i < j["rows"].size(); ++i) {
    const json& row = j["rows"][i];
    EXPECT_EQ(table[i + 1][column(head, "target_tree")], std::to_string(row["target"].get<long>()));
    EXPECT_EQ(table[i + 1][column(head, "occluded_at_travel_end")],
              row["occluded_at_travel_end"].get<bool>() ? "1" : "0");
    for (const auto& [c, k] : pairs) {
      const std::string cell = table[i + 1][column(head, c)];
      if (row[k].is_null()) {
        EXPECT_EQ(cell, "");
        continue;
      }
      char want[64];
      std::snprintf(want, sizeof want, "%.9g", row[k].get<double>());
      EXPECT_EQ(cell, want) << c << " row " << i;
    }
  }
}

TEST_F(Cli, ScenarioAndIoErrors) {
  write("run.json", small_config());
  EXPECT_EQ(run("run run.json --n-trials 9").status, 4);
  EXPECT_EQ(run("run run.json --scene-file nowhere.json").status, 5);
  write("blocker", std::string("x"));
  EXPECT_EQ(run("run run.json --output-dir blocker/out").status, 5);
  write("both.json", [] {
    json j = small_config();
    j["scene_file"] = "forest.json";
    return j;
  }());
  EXPECT_EQ(run("run both.json").status, 2);
}

TEST_F(Cli, RunWithASceneFile) {
  write("scene.json", json{{"extent", {80, 60}}, {"tree_count", 300}, {"target_count", 6}, {"seed", 2}});
  ASSERT_EQ(run("generate scene.json cfg/forest.json").status, 0);
  json c = small_config();
  c.erase("scene");
  c["scene_file"] = "forest.json";  // relative to the config file
  write("cfg/run.json", c);
  EXPECT_EQ(run("run cfg/run.json").status, 0);
  EXPECT_TRUE(fs::exists(path("out/trace.jsonl")));
}

TEST_F(Cli, SweepSingleCellMatchesRun) {
  write("run.json", small_config());
  write("grid.json", json{{"rotation_gain", {0.06}}});
  ASSERT_EQ(run("sweep run.json grid.json --seeds 1 --out sweep.csv").status, 0);
  ASSERT_EQ(run("run run.json").status, 0);
  const auto table = csv(read("sweep.csv"));
  ASSERT_EQ(table.size(), 2u);
  const json s = json::parse(read("out/summary.json"));
  char want[64];
  std::snprintf(want, sizeof want, "%.9g", s["efficacy"]["occlusion_incidence"].get<double>());
  EXPECT_EQ(table[1][column(table[0], "occlusion_incidence")], want);
  std::snprintf(want, sizeof want, "%.9g", s["efficacy"]["resolved_fraction"].get<double>());
  EXPECT_EQ(table[1][column(table[0], "resolved_fraction")], want);
}

TEST_F(Cli, SweepZeroGainsMatchBaseline) {
  json c = small_config();
  c["n_trials"] = 6;
  write("run.json", c);
  write("zero.json", json{{"rotation_gain", {0.0}},
                          {"translation_gain", {0.0}},
                          {"curvature_gain_deg_per_m", {0.0}}});
  write("unit.json", json::object());
  ASSERT_EQ(run("sweep run.json zero.json --seeds 4 --out zero.csv").status, 0);
  ASSERT_EQ(run("sweep run.json unit.json --seeds 4 --strategy none --out none.csv").status, 0);
  const auto zero = csv(read("zero.csv"));
  const auto none = csv(read("none.csv"));
  for (const char* col : {"occlusion_incidence", "resolved_fraction"}) {
    EXPECT_EQ(zero[1][column(zero[0], col)], none[1][column(none[0], col)]) << col;
  }
  EXPECT_EQ(zero[1][column(zero[0], "mean_abs_applied_rotation_deg")], "0");
}

TEST_F(Cli, SweepSerialEqualsParallel) {
  write("run.json", small_config());
  write("grid.json", json{{"curvature_gain_deg_per_m", {0.0, 2.6}}, {"tree_count", {200, 300}}});
  ASSERT_EQ(run("sweep run.json grid.json --seeds 2 --out a.csv").status, 0);
  ASSERT_EQ(run("sweep run.json grid.json --seeds 2 --out b.csv --serial").status, 0);
  EXPECT_EQ(read("a.csv"), read("b.csv"));
  EXPECT_EQ(csv(read("a.csv")).size(), 5u);
  write("bad.json", json{{"wind", {1}}});
  EXPECT_EQ(run("sweep run.json bad.json").status, 2);
}

TEST_F(Cli, CurvatureRaisesResolvedFraction) {
  const std::string cfg = std::string(OCCLUSIM_SOURCE_DIR) + "/configs/calibrated.json";
  const std::string grid = std::string(OCCLUSIM_SOURCE_DIR) + "/configs/sweep_curvature.json";
  ASSERT_EQ(run("sweep '" + cfg + "' '" + grid + "' --seeds 5 --out curve.csv").status, 0);
  const auto table = csv(read("curve.csv"));
  const std::size_t col = column(table[0], "resolved_fraction");
  ASSERT_GE(table.size(), 6u);
  for (std::size_t row = 2; row < table.size(); ++row) {
    EXPECT_GE(std::stod(table[row][col]), std::stod(table[row - 1][col])) << "cell " << row - 1;
  }
}

TEST_F(Cli, ResolveEmptyScene) {
  write("empty.json", scene_file({}));
  const Result r = run("resolve --scene empty.json --desk 50,51,90 --origin 50,50");
  EXPECT_EQ(r.status, 0);
  const json j = json::parse(r.out);
  EXPECT_EQ(j["status"], "already_free");
  EXPECT_EQ(j["rotation_delta"], 0.0);
  EXPECT_EQ(j["translation_delta"], 0.0);
}

TEST_F(Cli, ResolveEnclosedDesk) {
  std::vector<std::array<double, 3>> ring;
  for (int k = 0; k < 72; ++k) {
    const double a = deg_to_rad(5.0 * k);
    ring.push_back({50 + 2 * std::cos(a), 50 + 2 * std::sin(a), 2.0});
  }
  write("ring.json", scene_file(ring));
  const Result r = run("resolve --scene ring.json --desk 51,50,0 --origin 50,50");
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(json::parse(r.out)["status"], "unresolved");
  EXPECT_TRUE(json::parse(r.out)["cost"].is_null());
}

TEST_F(Cli, ResolveMatchesOracle) {
  std::vector<std::array<double, 3>> fence;
  std::vector<Circle> circles;
  for (int deg = -100; deg <= -25; deg += 5) {
    const Vec2 p = Vec2{50, 50} + unit_from_angle(deg_to_rad(deg));
    fence.push_back({p.x, p.y, 0.12});
    circles.emplace_back(p, 0.12);
  }
  write("fence.json", scene_file(fence));
  const Result r = run("resolve --scene fence.json --desk 51,50,0 --desk-size 0.8,0.4 --origin 50,50");
  ASSERT_EQ(r.status, 0);
  const json j = json::parse(r.out);
  const ResolutionOutcome want = oracle::enumerate(
      {Vec2{50, 50}, OrientedRect({51, 50}, 0.8, 0.4, 0.0), circles, ResolutionConstraints{}});
  ASSERT_EQ(want.status, ResolutionStatus::resolved);
  EXPECT_EQ(j["status"], "resolved");
  EXPECT_EQ(j["rotation_delta"].get<double>(), want.rotation_delta);
  EXPECT_EQ(j["translation_delta"].get<double>(), want.translation_delta);

  const Result locked =
      run("resolve --scene fence.json --desk 51,50,0 --origin 50,50 --lock cw --max-rotation-deg 30");
  EXPECT_EQ(locked.status, 1);
  EXPECT_EQ(run("resolve --scene fence.json --desk 50,50,0 --origin 50,50").status, 2);
  EXPECT_EQ(run("resolve --scene nowhere.json --desk 51,50,0 --origin 50,50").status, 5);
}

TEST_F(Cli, AnalyzeHandcraftedTrace) {
  // Header from a real run; the body is written by hand.
  write("run.json", small_config());
  ASSERT_EQ(run("run run.json").status, 0);
  std::string header;
  std::getline(std::istringstream(read("out/trace.jsonl")) >> std::ws, header);

  const auto trial = [](int k, bool travel, bool survey, const json& pointing) {
    return json{{"type", "trial"},
                {"trial", k},
                {"target", k},
                {"travel_time", 1.0 + k},
                {"survey_time", 2.0},
                {"occluded_at_travel_end", travel},
                {"occluded_at_survey_end", survey},
                {"teleport_adjustment_total_deg", 0.0},
                {"redirect_rotation_total_deg", 0.0},
                {"pointing_signed_error_deg", pointing}}
        .dump();
  };
  const auto pointing = [](double err_deg) {
    return json{{"type", "pointing"}, {"tree", 0}, {"pointed", deg_to_rad(err_deg)}, {"truth", 0.0}}
        .dump();
  };
  // (occluded, resolved) = (T,T), (T,F), (T,T), (F,-); errors +-20 degrees.
  std::string body = header + "\n";
  body += pointing(20) + "\n" + trial(0, true, false, 20.0) + "\n";
  body += pointing(-20) + "\n" + trial(1, true, true, -20.0) + "\n";
  body += pointing(20) + "\n" + trial(2, true, false, 20.0) + "\n";
  body += pointing(-20) + "\n" + trial(3, false, false, -20.0) + "\n";
  body += json{{"type", "footer"}, {"trials", 4}, {"final_mapping", {0.0, 0.0, 0.0}}}.dump() + "\n";
  write("hand.jsonl", body);

  const Result r = run("analyze hand.jsonl --elbow travel_time --k-max 3 --csv table.csv");
  ASSERT_EQ(r.status, 0) << r.out;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["strategy"], "rdw");
  EXPECT_EQ(j["n_trials"], 4);
  EXPECT_EQ(j["efficacy"]["occlusion_incidence"], 0.75);
  EXPECT_NEAR(j["efficacy"]["resolved_fraction"].get<double>(), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(j["orientation"]["signed_error_deg"].get<double>(), 0.0, 1e-9);
  EXPECT_NEAR(j["orientation"]["absolute_error_deg"].get<double>(), 20.0, 1e-9);
  EXPECT_NEAR(j["orientation"]["configuration_error_deg"].get<double>(), 20.0, 1e-9);
  EXPECT_NEAR(j["orientation"]["ego_orientation_error_deg"].get<double>(), 20.0, 1e-9);
  EXPECT_EQ(j["orientation"]["n"], 4);
  EXPECT_EQ(j["elbow"]["curve"].size(), 3u);
  EXPECT_EQ(csv(read("table.csv")).size(), 5u);

  // With a guess filter at 10 degrees every sample is dropped.
  const json none = json::parse(run("analyze hand.jsonl --drop-guesses 10").out);
  EXPECT_TRUE(none["orientation"].is_null());
}

TEST_F(Cli, AnalyzeErrors) {
  EXPECT_EQ(run("analyze").status, 2);
  write("run.json", small_config());
  ASSERT_EQ(run("run run.json --output-dir rdw").status, 0);
  ASSERT_EQ(run("run run.json --output-dir atr --strategy atr").status, 0);
  EXPECT_EQ(run("analyze rdw/trace.jsonl atr/trace.jsonl").status, 2);
  EXPECT_EQ(run("analyze rdw/trace.jsonl --elbow nothing").status, 2);
  EXPECT_EQ(run("analyze missing.jsonl").status, 5);
  const std::string trace = read("rdw/trace.jsonl");
  write("cut.jsonl", trace.substr(0, trace.size() / 2));
  EXPECT_EQ(run("analyze cut.jsonl").status, 2);
}

TEST_F(Cli, AnalyzeAcceptsRunOutput) {
  write("run.json", small_config());
  for (int seed = 1; seed <= 3; ++seed) {
    ASSERT_EQ(run("run run.json --seed " + std::to_string(seed) + " --output-dir s" +
                  std::to_string(seed))
                  .status,
              0);
  }
  const Result r = run("analyze s1/trace.jsonl s2/trace.jsonl s3/trace.jsonl");
  EXPECT_EQ(r.status, 0);
  const json j = json::parse(r.out);
  EXPECT_EQ(j["traces"], 3);
  EXPECT_EQ(j["n_trials"], 15);
}

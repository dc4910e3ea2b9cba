#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

namespace {

namespace fs = std::filesystem;

const std::string kCli = RELNAV_CLI_PATH;
const std::string kData = RELNAV_DATA_DIR;
const std::string kWork = "/tmp/relnav_cli_work";

int run(const std::string& args, const std::string& capture = "/dev/null") {
  const std::string cmd = kCli + " " + args + " > " + capture + " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

size_t line_count(const std::string& text) {
  size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  REQUIRE(f.good());
  f << text;
}

struct Workspace {
  Workspace() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
};

// Two epochs keep the end-to-end invocations quick.
std::string fast_scenario(const std::string& planner_extra) {
  return std::string(R"({
    "scene": ")") + kData + R"(/scenes/open_field.json",
    "almanac": ")" + kData + R"(/almanacs/dualcon.alm",
    "epochs": [302400.0, 302700.0],
    "map": {"node_spacing_m": 20.0},
    "planner": {"start": "n0", "target": "n10")" + planner_extra + R"(},
    "simulation": {"node": "n5", "lateral_offset_m": 1.85, "seed": 7}
  })";
}

}  // namespace

TEST_CASE("cli end to end") {
  Workspace ws;
  const std::string scn = kWork + "/fast.json";
  write_file(scn, fast_scenario(""));

  SUBCASE("help and defaults") {
    CHECK(run("--help", kWork + "/help.txt") == 0);
    CHECK(slurp(kWork + "/help.txt").find("predict-map") != std::string::npos);
    CHECK(run("", kWork + "/bare.txt") == 0);  // no subcommand: help, not an error

    CHECK(run("--print-defaults", kWork + "/defaults.json") == 0);
    const auto j = nlohmann::json::parse(slurp(kWork + "/defaults.json"));
    CHECK(j.contains("integrity"));
  }

  SUBCASE("validate") {
    CHECK(run("validate --scenario " + scn, kWork + "/v.txt") == 0);
    const std::string out = slurp(kWork + "/v.txt");
    CHECK(out.find("scenario OK") != std::string::npos);
    CHECK(out.find("config hash") != std::string::npos);

    CHECK(run("validate --scenario /no/such/file.json") == 1);
    CHECK(run("validate") != 0);  // missing required option

    write_file(kWork + "/broken.json", "{this is not json");
    CHECK(run("validate --scenario " + kWork + "/broken.json") == 1);
  }

  SUBCASE("predict, plan, simulate, plot") {
    const std::string out = kWork + "/out";
    REQUIRE(run("predict-map --scenario " + scn + " --out " + out, kWork + "/p.txt") == 0);
    REQUIRE(fs::exists(out + "/map.csv"));
    REQUIRE(fs::exists(out + "/graph.json"));
    CHECK(slurp(kWork + "/p.txt").find("map written") != std::string::npos);

    CHECK(run("plan --scenario " + scn + " --out " + out, kWork + "/plan.txt") == 0);
    const auto pj = nlohmann::json::parse(slurp(out + "/plan.json"));
    CHECK(pj.at("feasible").get<bool>());
    CHECK(pj.at("path").size() >= 2);
    CHECK(pj.at("path").front().get<std::string>() == "n0");
    CHECK(pj.at("path").back().get<std::string>() == "n10");
    CHECK(slurp(out + "/plan_report.csv").find("path, travel_distance_m") == 0);

    // Same map, but an unreachable safety threshold: no feasible route.
    const std::string strict_scn = kWork + "/strict.json";
    write_file(strict_scn, fast_scenario(R"(, "t_hpl_m": 1e-6)"));
    CHECK(run("plan --scenario " + strict_scn + " --out " + out, kWork + "/plan2.txt") == 2);

    CHECK(run("araim --scenario " + scn + " --out " + out, kWork + "/a.txt") == 0);
    const std::string log = slurp(out + "/araim_log.csv");
    CHECK(log.find("epoch_s, n_used, excluded, hpl_m") == 0);
    CHECK(line_count(log) == 3);  // header + one row per epoch
    CHECK(line_count(slurp(out + "/hpl_series.csv")) == 3);

    CHECK(run("plot-data --in " + out + "/map.csv --out " + out) == 0);
    const std::string series = slurp(out + "/map_series.csv");
    CHECK(line_count(series) == line_count(slurp(out + "/map.csv")));

    CHECK(run("plot-data --in " + out + "/araim_log.csv --out " + out) == 0);
    CHECK(line_count(slurp(out + "/log_series.csv")) == 3);

    write_file(kWork + "/junk.csv", "who, knows\n1, 2\n");
    CHECK(run("plot-data --in " + kWork + "/junk.csv --out " + out) == 1);
    CHECK(run("plot-data --in " + kWork + "/absent.csv --out " + out) == 1);
  }
}

#include <doctest.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fpcli.hpp"

using namespace fpcli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = main_entry(args, out, err);
  return {code, out.str(), err.str()};
}

int parse_code(const std::vector<std::string>& args) {
  try {
    parse_config(args);
  } catch (const CliError& e) {
    return e.code;
  }
  return ok;
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / ("fpress_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("parse config examples") {
  const auto c = parse_config({"dim", "--preset", "lambda-cantor", "--lambda", "0", "--depth", "6..12"});
  CHECK(c.command == "dim");
  CHECK(c.preset == "lambda-cantor");
  CHECK(c.params.at("lambda") == "0");
  CHECK(c.depth_first == 6);
  CHECK(c.depth_last == 12);
  CHECK(c.cap == 10000000);
  CHECK(c.format == "json");

  CHECK(parse_code({"dim", "--preset", "lambda-cantor", "--lambda", "3/2"}) == out_of_range);

  const auto p = parse_config({"pressure", "--ifs", "my.json", "--potential", "const:-0.5", "--depth", "4..8"});
  CHECK(p.ifs_path == "my.json");
  CHECK(p.potential == "const:-0.5");
  CHECK(p.depth_first == 4);
  CHECK(p.depth_last == 8);

  const auto named = parse_config({"pressure", "--ifs", "lambda-cantor", "--lambda", "1/2", "--depth", "4"});
  CHECK(named.preset == "lambda-cantor");
  CHECK(named.ifs_path.empty());
  CHECK(named.params.at("lambda") == "1/2");
}

TEST_CASE("parse config error codes are distinct") {
  CHECK(parse_code({"dim", "--preset", "lambda-cantor", "--lambda", "1/q"}) == config_error);
  CHECK(parse_code({"dim", "--preset", "lambda-cantor", "--lambda", "-1"}) == out_of_range);
  CHECK(parse_code({"dim", "--preset", "overlap-sierpinski", "--a1", "0.6", "--a2", "0"}) == out_of_range);
  CHECK(parse_code({"dim", "--preset", "lambda-cantor", "--ifs", "x.json"}) == conflicting_flags);
  CHECK(parse_code({"dim", "--preset", "lambda-cantor", "--lambda", "0", "--a1", "0"}) == conflicting_flags);
  CHECK(parse_code({"dim", "--preset", "lambda-cantor", "--lambda", "0", "--weights", "1"}) == conflicting_flags);
  CHECK(parse_code({"dim", "--preset", "lambda-cantor", "--lambda", "0", "--format", "csv"}) == conflicting_flags);
  CHECK(parse_code({"dim", "--preset", "lambda-cantor", "--lambda", "0", "--unknown"}) == config_error);
  CHECK(parse_code({"dim", "--preset", "lambda-cantor", "--lambda", "0", "--depth", "8..6"}) == config_error);
  CHECK(parse_code({"dim", "--preset", "lambda-cantor", "--lambda", "0", "--cap", "0"}) == config_error);
  CHECK(parse_code({"fly", "--preset", "lambda-cantor"}) == config_error);
  CHECK(parse_code({"entropy", "--preset", "lambda-cantor", "--lambda", "0"}) == config_error);
  CHECK(parse_code({"pressure", "--ifs", "x.json"}) == config_error);
}

TEST_CASE("explain round trip") {
  const std::vector<std::vector<std::string>> cases{
      {"dim", "--preset", "lambda-cantor", "--lambda", "0.5"},
      {"pressure", "--ifs", "my.json", "--potential", "const:-0.5", "--depth", "4..8", "--out", "p.csv", "--format",
       "csv", "--threads", "3"},
      {"entropy", "--preset", "overlap-sierpinski", "--a1", "1/2", "--a2", "0", "--weights", "0.5,0.25,0.25"},
      {"varcheck", "--preset", "lambda-cantor", "--lambda", "1", "--weights", "1/3,1/3,1/3", "--depth", "6", "--cap",
       "5000"},
      {"sweep", "--preset", "lambda-cantor", "--depth", "10", "--svg", "s.svg"},
      {"sweep", "--preset", "overlap-sierpinski", "--a1", "1/2", "--param", "a2", "--values", "0:0.4:5"},
  };
  for (const auto& args : cases) {
    const RunConfig c = parse_config(args);
    CHECK(parse_config(explain(c)) == c);
  }
  const auto text = invoke({"dim", "--preset", "lambda-cantor", "--lambda", "1/2", "--explain"});
  CHECK(text.code == ok);
  CHECK(text.out.rfind("dim --preset lambda-cantor --lambda 1/2 --depth 6..12", 0) == 0);
}

TEST_CASE("config file values yield to flags") {
  const fs::path dir = scratch_dir();
  const fs::path file = dir / "run.json";
  std::ofstream(file) << R"({"command":"pressure","preset":"lambda-cantor","lambda":"1/2","depth":"3..5","potential":"const:1"})";
  const auto c = parse_config({"--config", file.string(), "--depth", "4..6"});
  CHECK(c.command == "pressure");
  CHECK(c.params.at("lambda") == "1/2");
  CHECK(c.depth_first == 4);
  CHECK(c.potential == "const:1");
  const auto swapped = parse_config({"--config", file.string(), "--ifs", "other.json"});
  CHECK(swapped.preset.empty());
  CHECK(swapped.ifs_path == "other.json");
  CHECK(swapped.params.empty());
  std::ofstream(file) << R"({"command":"dim","colour":"red"})";
  CHECK(parse_code({"--config", file.string()}) == config_error);
  CHECK(parse_code({"--config", (dir / "missing.json").string()}) == io_error);
}

TEST_CASE("thread count from the environment") {
  ::setenv("FP_THREADS", "3", 1);
  CHECK(parse_config({"dim", "--preset", "lambda-cantor", "--lambda", "0"}).threads == 3);
  CHECK(parse_config({"dim", "--preset", "lambda-cantor", "--lambda", "0", "--threads", "2"}).threads == 2);
  ::setenv("FP_THREADS", "many", 1);
  CHECK(parse_code({"dim", "--preset", "lambda-cantor", "--lambda", "0"}) == config_error);
  ::unsetenv("FP_THREADS");
}

TEST_CASE("dim run prints the interval") {
  const auto r = invoke({"dim", "--preset", "lambda-cantor", "--lambda", "0", "--depth", "6..12"});
  CHECK(r.code == ok);
  const auto line = r.out.substr(r.out.rfind("dim ∈ ["));
  double lo = 0, hi = 0;
  REQUIRE(std::sscanf(line.c_str() + std::string("dim ∈ [").size(), "%lf, %lf", &lo, &hi) == 2);
  CHECK(lo <= std::log(2.0) / std::log(3.0));
  CHECK(hi >= std::log(2.0) / std::log(3.0));
}

TEST_CASE("run exit codes") {
  const fs::path dir = scratch_dir();
  const fs::path nc = dir / "nc.json";
  std::ofstream(nc) << R"({"mode":"exact","linear":[["1/2","0"],["0","1/3"]],"translations":[["0","0"],["1/2","2/3"]]})";
  CHECK(invoke({"dim", "--ifs", nc.string(), "--depth", "2..5"}).code == conformal_refusal);
  CHECK(invoke({"dim", "--ifs", (dir / "none.json").string(), "--depth", "2..5"}).code == io_error);
  CHECK(invoke({"dim", "--preset", "lambda-cantor", "--lambda", "1", "--depth", "12..14", "--cap", "1000"}).code ==
        cap_exceeded);
  const auto help = invoke({"--help"});
  CHECK(help.code == ok);
  CHECK(help.out.find("usage") != std::string::npos);
}

TEST_CASE("non-convergence still writes the artifact") {
  const fs::path dir = scratch_dir();
  const fs::path target = dir / "short.json";
  fs::remove(target);
  // Depths 1..3 on the overlapping system are far from the limit.
  const auto r = invoke({"dim", "--preset", "overlap-sierpinski", "--a1", "1/2", "--a2", "0", "--depth", "1..3",
                         "--out", target.string()});
  if (r.code == not_converged) CHECK(r.err.find("warning") != std::string::npos);
  CHECK((r.code == ok || r.code == not_converged));
  CHECK(fs::exists(target));
}

TEST_CASE("artifacts are written atomically") {
  const fs::path dir = scratch_dir();
  const fs::path target = dir / "p.csv";
  fs::remove(target);
  const auto r = invoke({"pressure", "--preset", "lambda-cantor", "--lambda", "1/2", "--potential", "const:-0.5",
                         "--depth", "4..6", "--format", "csv", "--out", target.string()});
  CHECK(r.code == ok);
  const std::string csv = slurp(target);
  CHECK(csv.rfind("# fractal-pressure v1\ndepth,low,high\n4,", 0) == 0);
  for (const auto& entry : fs::directory_iterator(dir))
    CHECK(entry.path().filename().string().find(".tmp-") == std::string::npos);

  write_atomic(target.string(), "new");
  CHECK(slurp(target) == "new");
  CHECK_THROWS_AS(write_atomic((dir / "no" / "such" / "dir.txt").string(), "x"), CliError);
  CHECK(slurp(target) == "new");
}

TEST_CASE("artifacts do not depend on the thread count") {
  const fs::path dir = scratch_dir();
  for (const std::string& command : {"pressure", "entropy", "dim"}) {
    std::vector<std::string> base{command, "--preset", "lambda-cantor", "--lambda", "1/3", "--depth", "5..8"};
    if (command == "pressure") base.insert(base.end(), {"--potential", "linear:0.4:0.1:0.4"});
    if (command == "entropy") base.insert(base.end(), {"--weights", "0.5,0.3,0.2"});
    std::vector<std::string> paths;
    for (const std::string threads : {"1", "8"}) {
      auto args = base;
      const fs::path out = dir / (command + "_" + threads + ".json");
      args.insert(args.end(), {"--threads", threads, "--out", out.string()});
      REQUIRE(invoke(args).code == ok);
      paths.push_back(out.string());
    }
    CHECK(slurp(paths[0]) == slurp(paths[1]));
  }
}

TEST_CASE("entropy and varcheck outputs") {
  const auto e = invoke({"entropy", "--preset", "lambda-cantor", "--lambda", "1", "--weights", "1/3,1/3,1/3",
                         "--depth", "3..4", "--out", "json"});
  REQUIRE(e.code == ok);
  const auto doc = nlohmann::json::parse(e.out.substr(0, e.out.find('\n')));
  REQUIRE(doc["estimates"].size() == 2);
  CHECK(doc["estimates"][1]["value"].get<double>() == doctest::Approx(std::log(3.0)));

  const auto v = invoke({"varcheck", "--preset", "lambda-cantor", "--lambda", "1/2", "--weights", "0.6,0.2,0.2",
                         "--depth", "6"});
  REQUIRE(v.code == ok);
  const auto j = nlohmann::json::parse(v.out.substr(0, v.out.find('\n')));
  for (const char* key : {"upper", "bernoulli_value", "certified_lower", "gap"}) CHECK(j.contains(key));
  CHECK(j["gap"].get<double>() >= -0.02);
}

TEST_CASE("lambda sweep") {
  const fs::path dir = scratch_dir();
  const fs::path csv = dir / "sweep.csv";
  const fs::path svg = dir / "sweep.svg";
  const auto r = invoke({"sweep", "--preset", "lambda-cantor", "--depth", "10", "--out", csv.string(), "--svg",
                         svg.string(), "--threads", "1"});
  CHECK(r.code == ok);
  std::istringstream rows(slurp(csv));
  std::string line;
  std::getline(rows, line);
  CHECK(line == "# fractal-pressure v1");
  std::getline(rows, line);
  CHECK(line == "lambda,value,dimension,lo,hi,converged");
  std::vector<std::vector<std::string>> table;
  while (std::getline(rows, line)) {
    std::vector<std::string> cells;
    std::istringstream in(line);
    std::string cell;
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    table.push_back(cells);
  }
  REQUIRE(table.size() == 9);
  CHECK(table.front()[0] == "0");
  CHECK(table[1][0] == "1/8");
  CHECK(table.back()[0] == "1");
  CHECK(std::stod(table.front()[2]) == doctest::Approx(0.631).epsilon(0.01));
  CHECK(std::stod(table.back()[2]) == doctest::Approx(1.0).epsilon(1e-6));
  for (std::size_t i = 1; i < table.size(); ++i) CHECK(std::stod(table[i][1]) > std::stod(table[i - 1][1]));

  const std::string chart = slurp(svg);
  const auto attr = [&](const std::string& name) {
    const auto at = chart.find(name + "=\"") + name.size() + 2;
    return std::stod(chart.substr(at, chart.find('"', at) - at));
  };
  CHECK(attr("data-y-min") >= 0.5);
  CHECK(attr("data-y-max") <= 1.05);
}

TEST_CASE("svg chart shapes") {
  SweepResult two{"lambda", {{"0", 0.0, 0.63, 0.62, 0.65, true, 0.1}, {"1", 1.0, 1.0, 1.0, 1.0, true, 0.2}}};
  const std::string chart = svg_chart(two);
  const auto at = chart.find("class=\"estimate\"");
  REQUIRE(at != std::string::npos);
  const auto start = chart.find("points=\"", at) + 8;
  const std::string points = chart.substr(start, chart.find('"', start) - start);
  CHECK(std::count(points.begin(), points.end(), ' ') == 1);
  CHECK(svg_chart(two) == chart);
  two.points[1].seconds = 9.0;
  CHECK(svg_chart(two) == chart);

  SweepResult empty{"lambda", {}};
  CHECK_THROWS_AS(svg_chart(empty), CliError);
  CHECK_THROWS_AS(emit_svg(empty, (scratch_dir() / "e.svg").string()), CliError);
  CHECK_FALSE(fs::exists(scratch_dir() / "e.svg"));
}

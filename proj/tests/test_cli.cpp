#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <vector>

#include "nodalab/cli.hpp"
#include "nodalab/report_io.hpp"

using namespace nodalab;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "nodalab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_command(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("nodalab_test_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("domain strings") {
  const DomainSpec r = parse_domain("rect:2x0.5");
  CHECK(r.kind == DomainKind::rectangle);
  CHECK(r.a == 2.0);
  CHECK(r.b == 0.5);
  const DomainSpec d = parse_domain("disk:0.75");
  CHECK(d.kind == DomainKind::disk);
  CHECK(d.r == 0.75);
  CHECK_THROWS_AS(parse_domain("square:1"), ConfigError);
  CHECK_THROWS_AS(parse_domain("rect:1"), ConfigError);
  CHECK_THROWS_AS(parse_domain("rect:1xq"), ConfigError);
}

TEST_CASE("potential grid files are interpolated bilinearly") {
  const fs::path dir = scratch_dir("potential");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "v.txt");
    f << "2 2 1\n0,1\n2,3\n";
  }
  DomainSpec d = DomainSpec::rectangle(1.0, 1.0);
  load_potential_grid(d, (dir / "v.txt").string());
  CHECK(d.potential_at({0.0, 0.0}) == doctest::Approx(0.0));
  CHECK(d.potential_at({1.0, 0.0}) == doctest::Approx(1.0));
  CHECK(d.potential_at({0.5, 0.5}) == doctest::Approx(1.5));
  {
    std::ofstream f(dir / "bad.txt");
    f << "2 2 1\n0,1\n2\n";
  }
  CHECK_THROWS_AS(load_potential_grid(d, (dir / "bad.txt").string()), ConfigError);
}

TEST_CASE("spectrum command writes its table and manifest") {
  const fs::path dir = scratch_dir("spectrum");
  CHECK(run({"--res", "32", "--out", dir.string(), "spectrum", "--count", "4"}) == 0);
  CHECK(fs::exists(dir / "spectrum.csv"));
  const Json m = read_json((dir / "run.json").string());
  CHECK(m["status"] == "ok");
  CHECK(m["config"]["count"] == 4);
  CHECK(m["outputs"].size() == 1);
}

TEST_CASE("configuration files override flags") {
  const fs::path dir = scratch_dir("config");
  fs::create_directories(dir);
  write_json(Json{{"domain", {{"kind", "disk"}, {"r", 0.5}}}, {"resolution", 32}, {"count", 2}},
             (dir / "cfg.json").string());
  CHECK(run({"--config", (dir / "cfg.json").string(), "--out", dir.string(), "spectrum", "--count", "7"}) == 0);
  const Json m = read_json((dir / "run.json").string());
  CHECK(m["config"]["count"] == 2);
  CHECK(m["config"]["domain"]["kind"] == "disk");
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch_dir("codes");
  CHECK(run({"--help"}) == 0);
  CHECK(run({"--out", dir.string()}) == 2);
  CHECK(run({"--domain", "triangle:1", "--out", dir.string(), "spectrum"}) == 2);
  CHECK(run({"--res", "32", "--out", dir.string(), "spectrum", "--count", "40"}) == 2);
  CHECK(run({"--res", "32", "--out", dir.string(), "morse-index", "--mode", "2"}) == 2);
  CHECK(run({"--res", "32", "--out", dir.string(), "spectrum", "--bogus"}) == 2);
}

TEST_CASE("morse-index reports the deficiency check") {
  const fs::path dir = scratch_dir("morse");
  CHECK(run({"--res", "48", "--out", dir.string(), "morse-index", "--mode", "2,1", "--K", "2"}) == 0);
  const Json h = read_json((dir / "hessian.json").string());
  CHECK(h["morse_index"] == 0);
  CHECK(h["d_n"] == 0);
  CHECK(h["mode"] == Json::array({2, 1}));
  CHECK(h["hessian"].size() == 2);
}

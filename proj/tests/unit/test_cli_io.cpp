#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"
#include "nsf/config.hpp"
#include "nsf/error.hpp"
#include "nsf/io.hpp"

namespace fs = std::filesystem;
using namespace nsf;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nsf_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(NSF_CLI) + " " + args + " > " + (log / "stdout.txt").string() + " 2> " +
                          (log / "stderr.txt").string();
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kTiny =
    "grid.nx = 8\ngrid.ny = 8\nbasis.n_modes = 2\nv0.kind = mode\nv0.amplitude = 0.5\n"
    "theta_b.left = 1\ntheta_b.right = 2\ntheta_b.bottom = 1+s\ntheta_b.top = 1+s\n"
    "run.dt = 0.01\nrun.t_end = 0.05\nrun.record_every = 2\n";

}  // namespace

TEST(Config, ParsesCommentsAndOverrides) {
  RawConfig raw = parse_config("# header\n\ngrid.nx = 12  # trailing\nrun.dt=0.5\n");
  EXPECT_EQ(raw.get("grid.nx"), "12");
  apply_override(raw, "grid.nx=20");
  const auto cfg = to_simulation_config(raw);
  EXPECT_EQ(cfg.nx, 20);
  EXPECT_EQ(cfg.dt, 0.5);
  EXPECT_EQ(cfg.ny, 32);
}

TEST(Config, UnknownKeyReportsLine) {
  try {
    parse_config("grid.nx = 4\nbogus = 1\n", "x.cfg");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("x.cfg:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_config("no equals sign\n"), ConfigError);
  EXPECT_THROW(to_simulation_config(parse_config("grid.nx = four\n")), ConfigError);
}

TEST(Config, MmsDefaults) {
  const auto cfg = to_simulation_config(parse_config("mms.enabled = true\nmms.base = 3\n"));
  EXPECT_TRUE(cfg.mms);
  EXPECT_EQ(cfg.theta0.kind, TemperatureSpec::Kind::Manufactured);
  EXPECT_EQ(cfg.theta_b.left.a, 3.0);
}

TEST(Config, HashIsFnv1a64OfCanonicalText) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64(parse_config("run.dt=1\ngrid.nx=4\n").canonical()),
            fnv1a64(parse_config("grid.nx = 4\nrun.dt = 1\n").canonical()));
}

TEST(Io, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300}) EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(Io, SnapshotRoundTrip) {
  const auto dir = scratch("snapshot");
  const Grid g(3, 2);
  SimulationState s;
  s.t = 0.125;
  s.velocity.coeffs = {1.0 / 3.0, -2.0};
  s.theta = ScalarField(g, 1.0);
  s.theta(2, 1) = std::acos(-1.0);
  write_snapshot((dir / "s.txt").string(), g, s);
  const auto r = read_snapshot((dir / "s.txt").string());
  EXPECT_EQ(r.t, 0.125);
  EXPECT_EQ(r.nx, 3);
  EXPECT_EQ(r.ny, 2);
  EXPECT_EQ(r.n_modes, 2);
  EXPECT_EQ(r.coeffs, s.velocity.coeffs);
  ASSERT_EQ(r.theta.size(), 20u);
  EXPECT_EQ(r.theta[1 * 5 + 2], std::acos(-1.0));
}

TEST(Io, OutDirResolution) {
  EXPECT_EQ(resolve_out_dir("given"), "given");
}

TEST(Cli, RunWritesArtifactsAndManifest) {
  const auto dir = scratch("cli_run");
  std::ofstream(dir / "tiny.cfg") << kTiny;
  const auto out = dir / "out";
  ASSERT_EQ(cli("run --config " + (dir / "tiny.cfg").string() + " --out " + out.string(), dir), 0)
      << slurp(dir / "stderr.txt");
  EXPECT_TRUE(fs::exists(out / "diagnostics.csv"));
  EXPECT_TRUE(fs::exists(out / "summary.json"));
  const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(m["exit_status"], 0);
  EXPECT_EQ(m["config_hash_fnv1a64"].get<std::string>().size(), 16u);
  // 5 steps recorded every 2 plus the last and the initial state.
  std::ifstream csv(out / "diagnostics.csv");
  int lines = 0;
  for (std::string l; std::getline(csv, l);) ++lines;
  EXPECT_EQ(lines, 1 + 4);
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  const auto dir = scratch("cli_determinism");
  std::ofstream(dir / "tiny.cfg") << kTiny << "v0.kind = random\nrun.seed = 9\n";
  ASSERT_EQ(cli("run --config " + (dir / "tiny.cfg").string() + " --out " + (dir / "a").string(), dir), 0);
  ASSERT_EQ(cli("run --config " + (dir / "tiny.cfg").string() + " --out " + (dir / "b").string(), dir), 0);
  EXPECT_EQ(slurp(dir / "a" / "diagnostics.csv"), slurp(dir / "b" / "diagnostics.csv"));
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli_exit");
  std::ofstream(dir / "zero.cfg") << kTiny << "theta0.kind = constant\ntheta0.value = 0\n";
  EXPECT_EQ(cli("run --config " + (dir / "zero.cfg").string() + " --out " + (dir / "z").string(), dir), 1);
  EXPECT_NE(slurp(dir / "stderr.txt").find("mu"), std::string::npos);
  EXPECT_EQ(cli("run --config " + (dir / "missing.cfg").string(), dir), 1);
  EXPECT_EQ(cli("frobnicate", dir), 1);
  EXPECT_EQ(cli("verify --scope laws", dir), 0);
  EXPECT_EQ(cli("verify --scope laws --inject-broken-law", dir), 2);
  EXPECT_EQ(cli("verify --scope nonsense", dir), 1);
  EXPECT_EQ(cli("study --kind refinement --levels 1 --config " + (dir / "zero.cfg").string(), dir), 1);
}

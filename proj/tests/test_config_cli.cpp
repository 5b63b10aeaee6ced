#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "contain/cli.hpp"
#include "contain/config.hpp"

using namespace contain;
namespace fs = std::filesystem;

namespace {

std::string fixture_text() {
  return R"(model.variant = monro_gaffney
model.rho = 0.007
model.K = 2e12
model.L_max = 2
model.N_crit = 5e11
init.S0 = 9.99e9
init.R0 = 1e7
thresholds.N_tol = 6e10
thresholds.N_min = 3e10
integrator.horizon = 2500
policy.mtd.variant = mtd
policy.cont.variant = containment
policy.cont.threshold = 6e10
policy.sched.variant = alternative
policy.sched.schedule = 0:0.4,100:1.2
outputs.dir = out
)";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("contain_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("a full scenario config parses to the expected pieces") {
  const ScenarioConfig cfg = parse_scenario_config(fixture_text());
  CHECK(cfg.model.kind == TumorModel::Kind::MonroGaffney);
  CHECK(cfg.model.law.rho == 0.007);
  CHECK(cfg.model.L_max == 2.0);
  CHECK(cfg.init.S == 9.99e9);
  CHECK(cfg.init.R == 1e7);
  CHECK(cfg.thr.N0 == cfg.init.N());
  CHECK(cfg.thr.N_tol == 6e10);
  CHECK(cfg.integ.horizon == 2500.0);
  REQUIRE(cfg.policies.size() == 3);
  CHECK(cfg.policies[0].first == "mtd");
  CHECK(cfg.policies[1].second.kind == Policy::Kind::Containment);
  CHECK(cfg.policies[2].second.schedule.breakpoints.size() == 2);
  CHECK(cfg.policies[2].second.schedule.at(150.0) == 1.2);
}

TEST_CASE("config echo re-parses to an identical scenario") {
  const ScenarioConfig cfg = parse_scenario_config(fixture_text());
  const std::string echo = render_scenario_config(cfg);
  const ScenarioConfig again = parse_scenario_config(echo);
  CHECK(render_scenario_config(again) == echo);
  CHECK(again.model.law.K == cfg.model.law.K);
  CHECK(again.init.S == cfg.init.S);
  CHECK(again.thr.N_min == cfg.thr.N_min);
  CHECK(again.policies.size() == cfg.policies.size());
  for (size_t i = 0; i < cfg.policies.size(); ++i) {
    CHECK(again.policies[i].first == cfg.policies[i].first);
    CHECK(again.policies[i].second.kind == cfg.policies[i].second.kind);
  }
}

TEST_CASE("validation errors carry the offending line and key") {
  // N_tol below the initial size.
  std::string bad = fixture_text();
  bad.replace(bad.find("thresholds.N_tol = 6e10"), 23, "thresholds.N_tol = 9e9 ");
  CHECK_THROWS_WITH_AS(parse_scenario_config(bad),
                       doctest::Contains("N_tol must be >= N0"), ConfigError);

  // Unknown keys are rejected by name.
  try {
    parse_scenario_config(fixture_text() + "model.dose_rate = 3\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    CHECK(std::string(err.what()).find("dose_rate") != std::string::npos);
    CHECK(err.line > 0);
  }

  CHECK_THROWS_AS(parse_scenario_config("model.variant = monro_gaffney\nmodel.variant = mtd\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_scenario_config("nonsense line\n"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_scenario_config(fixture_text() + "policy.x.variant = warp\n"),
                       doctest::Contains("unknown policy variant"), ConfigError);

  // Schedules must be numeric and strictly ordered.
  std::string sched = fixture_text();
  sched.replace(sched.find("0:0.4,100:1.2"), 13, "0:0.4,0:1.20 ");
  CHECK_THROWS_AS(parse_scenario_config(sched), ConfigError);
}

TEST_CASE("run command writes trajectories, curves, metrics and an echo") {
  const fs::path dir = temp_dir("run");
  const fs::path cfg_path = dir / "scenario.cfg";
  std::ofstream(cfg_path) << fixture_text();

  const int rc = cli::run_command(cfg_path.string(), (dir / "out").string());
  REQUIRE(rc == 0);
  for (const char* name : {"mtd", "cont", "sched"}) {
    CAPTURE(name);
    CHECK(fs::exists(dir / "out" / (std::string(name) + "_trajectory.csv")));
    CHECK(fs::exists(dir / "out" / (std::string(name) + "_curve.csv")));
  }
  CHECK(fs::exists(dir / "out" / "metrics.csv"));

  // Header shapes.
  const std::string traj = slurp(dir / "out" / "mtd_trajectory.csv");
  CHECK(traj.rfind("t,S,R,N,L,phase\n", 0) == 0);
  const std::string curve = slurp(dir / "out" / "mtd_curve.csv");
  CHECK(curve.rfind("r,N_tilde,S_tilde,L_tilde,t_of_r\n", 0) == 0);
  const std::string metrics = slurp(dir / "out" / "metrics.csv");
  CHECK(metrics.rfind("policy,t_progression,t_failure,t_survival\n", 0) == 0);
  CHECK(metrics.find("not_reached") == std::string::npos);  // all metrics finite here

  // The echo re-parses to the same scenario.
  const ScenarioConfig cfg = parse_scenario_config(fixture_text());
  const ScenarioConfig echoed = load_scenario_config((dir / "out" / "config_echo.cfg").string());
  CHECK(render_scenario_config(echoed) == render_scenario_config(cfg));

  // Byte-deterministic outputs.
  const int rc2 = cli::run_command(cfg_path.string(), (dir / "out2").string());
  REQUIRE(rc2 == 0);
  CHECK(slurp(dir / "out2" / "mtd_trajectory.csv") == traj);
  fs::remove_all(dir);
}

TEST_CASE("run command rejects bad configs and infeasible models") {
  const fs::path dir = temp_dir("bad");
  const fs::path bad_cfg = dir / "bad.cfg";
  std::ofstream(bad_cfg) << fixture_text() << "typo.key = 1\n";
  CHECK(cli::run_command(bad_cfg.string(), (dir / "o").string()) == 2);

  // A logistic mutation model whose competition loses to the mutation
  // inflow: the assumption check must veto the run.
  const fs::path infeasible = dir / "infeasible.cfg";
  std::ofstream(infeasible) << R"(model.variant = mutation
model.law = logistic
model.rho = 0.01
model.K = 5e11
model.tau1 = 1e-6
model.tau2 = 0
model.L_max = 2
model.N_crit = 5e11
init.S0 = 1e10
init.R0 = 2.3e5
thresholds.N_tol = 6e10
integrator.horizon = 2000
policy.mtd.variant = mtd
)";
  CHECK(cli::run_command(infeasible.string(), (dir / "o2").string()) == 3);
  fs::remove_all(dir);
}

TEST_CASE("figure-data exports the captioned panels; unknown ids are usage errors") {
  const fs::path dir = temp_dir("fig");
  const fs::path cfg_path = dir / "scenario.cfg";
  std::ofstream(cfg_path) << fixture_text();

  REQUIRE(cli::figure_data_command("fig3", cfg_path.string(), (dir / "f3").string()) == 0);
  for (const char* label : {"mtd", "cont_n0", "cont_ntol"}) {
    CHECK(fs::exists(dir / "f3" / ("fig3_" + std::string(label) + "_time.csv")));
    CHECK(fs::exists(dir / "f3" / ("fig3_" + std::string(label) + "_rn.csv")));
  }

  REQUIRE(cli::figure_data_command("fig4", cfg_path.string(), (dir / "f4").string()) == 0);
  CHECK(fs::exists(dir / "f4" / "fig4_rstar.csv"));

  REQUIRE(cli::figure_data_command("fig5", cfg_path.string(), (dir / "f5").string()) == 0);
  CHECK(fs::exists(dir / "f5" / "fig5_cont_rn.csv"));
  CHECK(fs::exists(dir / "f5" / "fig5_alt_rn.csv"));
  CHECK(fs::exists(dir / "f5" / "fig5_loci.csv"));

  CHECK(cli::figure_data_command("fig9", cfg_path.string(), (dir / "f9").string()) == 2);
  fs::remove_all(dir);
}

TEST_CASE("verify command: unknown suites are usage errors") {
  const fs::path dir = temp_dir("verify");
  CHECK(cli::verify_command("P99", 2, 1, dir.string(), false) == 2);
  fs::remove_all(dir);
}

TEST_CASE("verify command runs a small suite and writes its report") {
  const fs::path dir = temp_dir("verify_run");
  CHECK(cli::verify_command("P4", 2, 11, dir.string(), false) == 0);
  CHECK(fs::exists(dir / "verify_P4.txt"));
  const std::string report = slurp(dir / "verify_P4.txt");
  CHECK(report.find("suite P4") != std::string::npos);
  CHECK(report.find("failures 0") != std::string::npos);

  // The broken-fixture run must fail loudly.
  CHECK(cli::verify_command("P1", 2, 11, dir.string(), true) == 1);
  fs::remove_all(dir);
}

TEST_CASE("the shipped fixture config produces the six figure files") {
  const fs::path dir = temp_dir("fixture");
  const std::string cfg = std::string(CONTAIN_SOURCE_DIR) + "/configs/monro_gaffney_fig3.cfg";
  REQUIRE(cli::run_command(cfg, dir.string()) == 0);
  for (const char* name : {"mtd", "cont_n0", "cont_ntol"}) {
    CAPTURE(name);
    CHECK(fs::exists(dir / (std::string(name) + "_trajectory.csv")));
    CHECK(fs::exists(dir / (std::string(name) + "_curve.csv")));
    CHECK(fs::exists(dir / (std::string(name) + "_events.txt")));
  }
  // Containment at the initial size holds the plateau there.
  const std::string traj = slurp(dir / "cont_n0_trajectory.csv");
  CHECK(traj.find(",10000000000,") != std::string::npos);
  fs::remove_all(dir);
}

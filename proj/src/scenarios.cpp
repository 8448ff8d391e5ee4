#include "omx/experiments.hpp"

namespace omx {

ScenarioConfig scenario_fig2() {
  ScenarioConfig c;
  c.name = "fig2";
  c.model = ModelKind::single;
  c.single.omega_c = 0.0;
  c.single.omega_m = 1.0;
  c.single.g0 = 0.8;
  c.single.kappa = 0.005;
  c.single.gamma_m = 0.00167;
  c.n_th = {0.0, 20.0};
  c.initial_state = InitialState{"cavity_superposition", {0, 3}};
  c.n_c = 4;
  c.n_m = {50, 100};
  c.t_end = {270.0, 25.0};
  c.dt_out = 0.05;
  c.solver.rel_tol = 1e-9;
  c.solver.abs_tol = 1e-11;
  c.outputs = {"abs_rho03"};
  c.convergence = true;
  return c;
}

ScenarioConfig scenario_fig3() {
  ScenarioConfig c;
  c.name = "fig3";
  c.model = ModelKind::single;
  c.single.omega_c = 0.0;
  c.single.omega_m = 1.0;
  c.single.g0 = 1.0;
  c.single.kappa = 0.005;
  c.single.gamma_m = 0.0033;
  c.n_th = {0.0, 10.0};
  c.drive = DriveParams::at_detuning(0.1 * c.single.kappa, 1.0);
  c.detuning_at_polaron_shift = true;
  c.n_c = 3;
  c.n_m = {0};
  c.sweep = SweepGrid{"beta0", 0.4, 2.0, 0.02};
  c.outputs = {"g2", "n_c"};
  c.expected_peaks = g2_peak_positions(8);
  return c;
}

namespace {

ScenarioConfig fig4_base(const std::string& name, double g2) {
  ScenarioConfig c;
  c.name = name;
  c.model = ModelKind::two_cavity;
  c.two.omega_c1 = 0.0;
  c.two.omega_c2 = 0.0;
  c.two.g1 = 1.5;
  c.two.g2 = g2;
  c.two.kappa1 = 0.005;
  c.two.kappa2 = 0.005;
  c.two.omega_m = 1.0;
  c.two.gamma_m = 0.00167;
  c.single.gamma_m = c.two.gamma_m;
  c.n_th = {20.0};
  c.initial_state = InitialState{"cavity_bell", {}};
  c.n_c = 2;
  c.n_c2 = 2;
  c.n_m = {0};
  c.t_end = {60.0};
  c.dt_out = 0.1;
  c.solver.rel_tol = 1e-10;
  c.solver.abs_tol = 1e-12;
  c.outputs = {"en"};
  return c;
}

}  // namespace

std::vector<ScenarioConfig> scenario_fig4() {
  ScenarioConfig equal = fig4_base("fig4_equal", 1.5);
  equal.expect_dsme_equals_sme = true;
  ScenarioConfig unequal = fig4_base("fig4_unequal", 0.5);
  return {equal, unequal};
}

std::vector<ScenarioConfig> preset(const std::string& name) {
  if (name == "fig2") return {scenario_fig2()};
  if (name == "fig3") return {scenario_fig3()};
  if (name == "fig4") return scenario_fig4();
  if (name == "fig4_equal") return {scenario_fig4()[0]};
  if (name == "fig4_unequal") return {scenario_fig4()[1]};
  throw ConfigError("unknown preset '" + name +
                    "' (expected fig2, fig3, fig4, fig4_equal, fig4_unequal)");
}

}  // namespace omx

#include "fbstab/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>

#include "fbstab/harness.hpp"
#include "fbstab/variation.hpp"

namespace fbstab {

namespace {

ArrayXd linspace(double lo, double hi, int n) {
  ArrayXd s(n);
  for (int i = 0; i < n; ++i) s[i] = lo + (hi - lo) * i / (n - 1);
  return s;
}

bool is_critical(const Scenario& sc) {
  try {
    require_critical(sc);
    return true;
  } catch (const NotCritical&) {
    return false;
  }
}

void flux_series(ReportDocument& rep, const Scenario& sc, const GridField& u,
                 const StripDomain& dom) {
  const BoundaryDensity flux = normal_flux(u, dom);
  SeriesTable t;
  t.name = "flux";
  t.columns = {"x", "dnu_u", "q"};
  for (int i = 0; i <= sc.nx; ++i) {
    const double x = -1.0 + 2.0 * i / sc.nx;
    t.rows.push_back({x, flux.values[i], sc.q_field.q(x, dom.top(x))});
  }
  rep.series.push_back(std::move(t));
}

void cmd_solve(ReportDocument& rep, const RunConfig& cfg) {
  const Scenario& sc = cfg.scenario;
  const StripDomain dom = sc.domain(0.0);
  GridField u = solve_harmonic(dom, sc.bottom, BoundaryDensity::constant(0.0, sc.nx));
  const EnergyBreakdown e = energy(u, sc.q_field, dom);
  rep.info("energy_dirichlet", e.dirichlet);
  rep.info("energy_volume", e.volume);
  rep.info("energy_total", e.total);
  const auto el = check_euler_lagrange(u, sc.q_field, dom);
  rep.check_bound("boundary_value_residual", el.boundary_value_residual, 1e-10);
  rep.info("interior_residual", el.interior_residual);
  rep.info("flux_residual", el.flux_residual);
  flux_series(rep, sc, u, dom);
}

void cmd_criticality(ReportDocument& rep, const RunConfig& cfg) {
  const Scenario& sc = cfg.scenario;
  const StripDomain dom = sc.domain(0.0);
  GridField u = solve_harmonic(dom, sc.bottom, BoundaryDensity::constant(0.0, sc.nx));
  const CriticalityReport crit = check_criticality(u, sc.q_field, dom);
  rep.check_flag("critical_base_state", is_critical(sc), crit.residual,
                 "residual at the discretization floor");
  rep.check_flag("hopf_flux_negative", crit.flux_negative);
  const auto el = check_euler_lagrange(u, sc.q_field, dom);
  rep.info("el_interior_residual", el.interior_residual);
  rep.info("el_boundary_residual", el.boundary_value_residual);
  rep.info("el_flux_residual", el.flux_residual);
  flux_series(rep, sc, u, dom);
}

void cmd_secondvar(ReportDocument& rep, const RunConfig& cfg) {
  const Scenario& sc = cfg.scenario;
  SeriesTable t;
  t.name = "quadratic_form";
  t.columns = {"k", "bulk", "boundary", "total"};
  for (int k = 1; k <= 3; ++k) {
    auto psi = BoundaryDensity::sample(
        [k](double x) { return std::cos(k * M_PI * x); }, sc.nx);
    const QuadraticFormReport q = second_variation_form(psi, sc);
    rep.info("form_total_cos" + std::to_string(k), q.total);
    t.rows.push_back({static_cast<double>(k), q.bulk, q.boundary, q.total});
  }
  rep.series.push_back(std::move(t));

  if (!sc.bump.is_zero()) {
    const ArrayXd grid = uniform_grid(sc.nx);
    const FlowMaps maps0 = flow_maps(0.0, grid, sc.profile, sc.bump, sc.flow_steps);
    const VariationReport at0 = second_variation_along_flow(0.0, sc, maps0);
    const QuadraticFormReport form = second_variation_form(normal_velocity(maps0), sc);
    const double rel = std::abs(at0.second - form.total) /
                       std::max(std::abs(form.total), 1e-300);
    rep.check_bound("flow_vs_form_rel_dev_at_0", rel, 0.02);
    for (double s : cfg.command.s_values) {
      const FlowMaps maps = flow_maps(s, grid, sc.profile, sc.bump, sc.flow_steps);
      const VariationReport v = second_variation_along_flow(s, sc, maps);
      rep.info("second_variation_s" + std::to_string(s), v.second);
    }
  }
}

void cmd_coercivity(ReportDocument& rep, const RunConfig& cfg) {
  const Scenario& sc = cfg.scenario;
  const CoercivityEstimate est = coercivity_constant(sc, sc.modes);
  rep.info("coercivity_eigenvalue", est.eigenvalue);
  rep.check_bound("form_asymmetry", est.asymmetry, 1e-6,
                  est.asymmetry > 1e-6 ? "warning threshold exceeded" : "");
  rep.info("form_max_offdiag", est.max_offdiag);

  SeriesTable t;
  t.name = "tubular";
  t.columns = {"epsilon", "mu_epsilon", "eps_mu", "c_epsilon"};
  for (double eps : cfg.command.epsilons) {
    const CoercivityEstimate tub = tubular_coercivity(sc, eps, sc.modes);
    rep.info("c_eps_" + std::to_string(eps), tub.eigenvalue);
    t.rows.push_back({eps, *tub.mu, eps * *tub.mu, tub.eigenvalue});
  }
  rep.series.push_back(std::move(t));
}

void cmd_flow(ReportDocument& rep, const RunConfig& cfg) {
  const Scenario& sc = cfg.scenario;
  if (sc.bump.is_zero()) {
    rep.info("flow_identities", 0.0, "zero bump: all identities hold trivially");
    return;
  }
  const ArrayXd grid = uniform_grid(sc.nx);
  double worst_defect = 0.0, worst_tang = 0.0, worst_cons = 0.0,
         worst_implicit = 0.0, worst_est1 = 0.0;
  bool t0_in_range = true;
  for (double s : cfg.command.s_values) {
    const FlowMaps maps = flow_maps(s, grid, sc.profile, sc.bump, sc.flow_steps);
    for (int i = 0; i < grid.size(); ++i) {
      t0_in_range = t0_in_range && maps.t0[i] >= 0.0 && maps.t0[i] <= s;
      worst_defect = std::max(
          worst_defect, std::abs(maps.h[i] - sc.profile.value(maps.g[i]) -
                                 s * sc.bump.value(maps.g[i])));
      worst_est1 = std::max(worst_est1, std::abs(maps.dgds[i]) -
                                            std::abs(sc.bump.value(maps.g[i])));
    }
    worst_tang = std::max(worst_tang, tangential_residual(maps, sc.profile, sc.bump));
    for (double frac : {0.31, 0.5, 0.72}) {
      const double x = sc.bump.a() + (sc.bump.b() - sc.bump.a()) * frac;
      if (std::abs(sc.bump.value(x)) < 1e-12) continue;
      const HitResult hit = hitting_time(s, x, sc.profile, sc.bump, sc.flow_steps);
      worst_implicit = std::max(
          worst_implicit,
          t0_implicit_residual(s, x, hit, sc.profile, sc.bump, 256, sc.flow_steps));
      if (hit.t0 > 0.0) {
        const Trajectory traj =
            integrate_characteristic(x, sc.profile, sc.bump, hit.t0, sc.flow_steps);
        worst_cons = std::max(worst_cons,
                              conservation_residual(traj, sc.profile, sc.bump));
      }
    }
  }
  rep.check_flag("t0_within_range", t0_in_range);
  rep.check_bound("graph_identity_defect", worst_defect, 1e-8);
  rep.check_bound("tangential_residual", worst_tang, 1e-12);
  rep.check_bound("conservation_residual", worst_cons, 1e-6);
  rep.check_bound("t0_implicit_residual", worst_implicit, 1e-6);
  rep.check_flag("velocity_bound_est1", worst_est1 <= 1e-15, worst_est1,
                 "|dg/ds| <= |phi(g)|");
  try {
    const DiffeoFamily fam = build_diffeo(sc.profile, sc.bump, 1.0, sc.box(),
                                          sc.flow_steps);
    const AdmissibilityReport adm = admissibility_report(fam, cfg.command.s_values);
    rep.check_flag("admissible_flow", adm.admissible(), adm.max_dphi_minus_identity);
    rep.check_bound("image_identity_defect", adm.image_defect, 1e-8);
  } catch (const Error& e) {
    rep.check_flag("admissible_flow", false, 0.0, e.what());
  }

  const double s_last = cfg.command.s_values.empty() ? 1.0 : cfg.command.s_values.back();
  const FlowMaps maps = flow_maps(s_last, grid, sc.profile, sc.bump, sc.flow_steps);
  SeriesTable t;
  t.name = "flow_maps";
  t.columns = {"x", "g", "h", "t0", "dgdx", "dgds", "vel_nu", "acc_nu"};
  for (int i = 0; i < grid.size(); ++i)
    t.rows.push_back({grid[i], maps.g[i], maps.h[i], maps.t0[i], maps.dgdx[i],
                      maps.dgds[i], maps.vel_nu[i], maps.acc_nu[i]});
  rep.series.push_back(std::move(t));
}

void cmd_sweep(ReportDocument& rep, const RunConfig& cfg) {
  const Scenario& sc = cfg.scenario;
  FlowEnergyTrace trace = energy_along_flow(sc, linspace(0.0, cfg.command.s_max,
                                                         cfg.command.s_count));
  FlowEnergyTrace fd_trace = energy_along_flow(
      sc, linspace(0.0, cfg.command.fd_max, cfg.command.fd_count));
  if (!sc.bump.is_zero()) {
    const FdCheckReport fd = fd_second_derivative_check(fd_trace);
    rep.check_bound("fd_vs_analytic_rel_dev", fd.max_rel_dev, 0.05);
    const ArrayXd grid = uniform_grid(sc.nx);
    const FlowMaps maps0 = flow_maps(0.0, grid, sc.profile, sc.bump, sc.flow_steps);
    const double first0 = second_variation_along_flow(0.0, sc, maps0).first;
    const double slack = 0.75 * std::abs(fd_trace.d2F_analytic[0]) *
                             (fd_trace.s[1] - fd_trace.s[0]) +
                         1e-3 * std::abs(fd_trace.F[0]);
    rep.check_bound("first_difference_vs_1var", fd.first_diff0 - first0, slack);
  } else {
    rep.info("fd_vs_analytic_rel_dev", 0.0, "zero bump");
  }
  SeriesTable t;
  t.name = "flow_energy";
  t.columns = {"s", "F", "d2F_analytic", "d2F_fd", "defect_sup"};
  for (int k = 0; k < trace.s.size(); ++k)
    t.rows.push_back({trace.s[k], trace.F[k], trace.d2F_analytic[k],
                      trace.d2F_fd[k], trace.defect_sup[k]});
  rep.series.push_back(std::move(t));
  SeriesTable tf;
  tf.name = "fd_check";
  tf.columns = {"s", "F", "d2F_analytic", "d2F_fd", "defect_sup"};
  for (int k = 0; k < fd_trace.s.size(); ++k)
    tf.rows.push_back({fd_trace.s[k], fd_trace.F[k], fd_trace.d2F_analytic[k],
                       fd_trace.d2F_fd[k], fd_trace.defect_sup[k]});
  rep.series.push_back(std::move(tf));
}

void cmd_wave(ReportDocument& rep, const RunConfig& cfg) {
  const Scenario base = cfg.scenario;
  const Scenario sc = water_wave_scenario(cfg.command.wave_q, cfg.command.wave_g,
                                          base.profile, base.nx, base.ny, base.modes);
  const StripDomain dom = sc.domain(0.0);
  double worst = 0.0;
  for (int i = 0; i <= sc.nx; ++i) {
    const double x = -1.0 + 2.0 * i / sc.nx;
    const double W1 = dom.top_d1(x);
    const Vector2d gq = sc.q_field.grad_q2(x, dom.top(x));
    const double dnu = (-W1 * gq[0] + gq[1]) / std::sqrt(1.0 + W1 * W1);
    const double expected = -2.0 * cfg.command.wave_g / std::sqrt(1.0 + W1 * W1);
    worst = std::max(worst, std::abs(dnu - expected));
  }
  rep.check_bound("dnu_q2_formula", worst, 1e-10);
  const double head = cfg.command.wave_q -
                      2.0 * cfg.command.wave_g * sc.profile.max_value();
  rep.info("qmin_head", head, head > 0.0 ? "stability ops admissible"
                                         : "degenerate: energy evaluation only");
  GridField u = solve_harmonic(dom, sc.bottom, BoundaryDensity::constant(0.0, sc.nx));
  const EnergyBreakdown e = energy(u, sc.q_field, dom);
  rep.info("energy_total", e.total);
  if (head > 0.0) {
    const CoercivityEstimate est = coercivity_constant(sc, std::min(sc.modes, 8));
    rep.info("coercivity_eigenvalue", est.eigenvalue);
  }
}

void cmd_verify(ReportDocument& rep, const RunConfig& cfg) {
  const Scenario& sc = cfg.scenario;
  rep.check_flag("critical_base_state", is_critical(sc), criticality_residual(sc));
  cmd_flow(rep, cfg);
  if (!sc.bump.is_zero()) {
    const ArrayXd grid = uniform_grid(sc.nx);
    const FlowMaps maps0 = flow_maps(0.0, grid, sc.profile, sc.bump, sc.flow_steps);
    const VariationReport at0 = second_variation_along_flow(0.0, sc, maps0);
    const QuadraticFormReport form = second_variation_form(normal_velocity(maps0), sc);
    rep.check_bound("flow_vs_form_rel_dev_at_0",
                    std::abs(at0.second - form.total) /
                        std::max(std::abs(form.total), 1e-300),
                    0.02);
  }
  const CoercivityEstimate est =
      coercivity_constant(sc, std::min(sc.modes, 16));
  rep.check_flag("coercive_base_state", est.eigenvalue > 0.0, est.eigenvalue);
  double prev_mu = 0.0;
  bool mu_monotone = true;
  for (double eps : cfg.command.epsilons) {
    const double mu = mu_epsilon(sc, eps, std::min(sc.modes, 16));
    mu_monotone = mu_monotone && mu > prev_mu;
    prev_mu = mu;
  }
  rep.check_flag("mu_epsilon_divergence", mu_monotone, prev_mu,
                 "mu increases as epsilon decreases");
}

}  // namespace

ReportDocument run(const RunConfig& cfg, const std::string& subcommand) {
  ReportDocument rep;
  rep.command = subcommand;
  rep.config_echo = cfg.echo;
  try {
    if (subcommand == "solve") cmd_solve(rep, cfg);
    else if (subcommand == "criticality") cmd_criticality(rep, cfg);
    else if (subcommand == "secondvar") cmd_secondvar(rep, cfg);
    else if (subcommand == "coercivity") cmd_coercivity(rep, cfg);
    else if (subcommand == "flow") cmd_flow(rep, cfg);
    else if (subcommand == "verify") cmd_verify(rep, cfg);
    else if (subcommand == "sweep") cmd_sweep(rep, cfg);
    else if (subcommand == "wave") cmd_wave(rep, cfg);
    else throw ConfigInvalid("unknown subcommand: " + subcommand);
  } catch (const ConfigInvalid&) {
    throw;
  } catch (const Error& e) {
    rep.check_flag(std::string("error"), false, 0.0, e.what());
  }
  return rep;
}

int run_cli(const std::string& config_path, const std::string& subcommand,
            const std::string& out_dir, const CliOverrides& overrides) {
  RunConfig cfg;
  try {
    cfg = apply_overrides(load_config(config_path), overrides);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
  const auto start = std::chrono::steady_clock::now();
  ReportDocument rep = run(cfg, subcommand);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    emit(rep, out_dir, wall);
  } catch (const Error& e) {
    std::cerr << "emit error: " << e.what() << "\n";
    return 2;
  }
  for (const auto& c : rep.checks) {
    std::printf("%s %-32s value=%.6g", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                c.value);
    if (c.tolerance > 0.0) std::printf(" tol=%.3g", c.tolerance);
    if (!c.note.empty()) std::printf("  (%s)", c.note.c_str());
    std::printf("\n");
  }
  return rep.all_pass() ? 0 : 2;
}

}  // namespace fbstab

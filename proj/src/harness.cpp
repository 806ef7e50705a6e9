#include "fbstab/harness.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace fbstab {

Scenario make_scenario(PeriodicProfile profile, BoundaryDensity bottom,
                       QField q_field, BumpPerturbation bump, int nx, int ny,
                       int modes) {
  if (nx < 8 || ny < 8)
    throw GridTooSmall("scenario grid must have Nx >= 8 and Ny >= 8");
  if (bottom.intervals() != nx)
    throw Error("bottom datum must be sampled on the Nx grid");
  if (bottom.values.minCoeff() <= 0.0)
    throw Error("bottom datum u* must be strictly positive");
  Scenario sc;
  sc.profile = std::move(profile);
  sc.bottom = std::move(bottom);
  sc.q_field = std::move(q_field);
  sc.bump = std::move(bump);
  sc.nx = nx;
  sc.ny = ny;
  sc.modes = modes;
  return sc;
}

namespace {

double total_energy(const Scenario& sc, double s, int nx, int ny,
                    const BoundaryDensity& bottom, double* defect_sup) {
  StripDomain dom(sc.profile, sc.bump.is_zero() ? nullptr : &sc.bump, s, nx, ny);
  BoundaryDensity top = BoundaryDensity::constant(0.0, nx);
  GridField u = solve_harmonic(dom, bottom, top);
  if (defect_sup)
    *defect_sup = check_criticality(u, sc.q_field, dom).residual;
  return energy(u, sc.q_field, dom).total;
}

ArrayXd resample_half(const ArrayXd& values) {
  const int n = static_cast<int>(values.size()) - 1;
  ArrayXd out(n / 2 + 1);
  for (int i = 0; i <= n / 2; ++i) out[i] = values[2 * i];
  return out;
}

}  // namespace

FlowEnergyTrace energy_along_flow(const Scenario& sc, const ArrayXd& s_grid) {
  const int n = static_cast<int>(s_grid.size());
  for (int k = 0; k < n; ++k) {
    if (s_grid[k] < 0.0 || s_grid[k] > 1.0 ||
        (k > 0 && s_grid[k] <= s_grid[k - 1]))
      throw Error("s-grid must be strictly increasing within [0,1]");
  }
  FlowEnergyTrace trace;
  trace.s = s_grid;
  trace.F.resize(n);
  trace.d2F_analytic.resize(n);
  trace.d2F_fd = ArrayXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  trace.defect_sup.resize(n);
  const ArrayXd x_grid = uniform_grid(sc.nx);
  for (int k = 0; k < n; ++k) {
    const double s = s_grid[k];
    double defect = 0.0;
    trace.F[k] = total_energy(sc, s, sc.nx, sc.ny, sc.bottom, &defect);
    trace.defect_sup[k] = defect;
    if (sc.bump.is_zero()) {
      trace.d2F_analytic[k] = 0.0;
    } else {
      const FlowMaps maps = flow_maps(s, x_grid, sc.profile, sc.bump, sc.flow_steps);
      trace.d2F_analytic[k] = second_variation_along_flow(s, sc, maps).second;
    }
  }
  return trace;
}

FdCheckReport fd_second_derivative_check(FlowEnergyTrace& trace) {
  const int n = static_cast<int>(trace.s.size());
  if (n < 5) throw TooFewSamples("finite-difference check needs >= 5 s-samples");
  const double ds = trace.s[1] - trace.s[0];
  for (int k = 2; k < n; ++k)
    if (std::abs((trace.s[k] - trace.s[k - 1]) - ds) > 1e-12 * std::max(1.0, std::abs(ds)))
      throw TooFewSamples("s-grid must be uniformly spaced");

  for (int k = 1; k + 1 < n; ++k)
    trace.d2F_fd[k] =
        (trace.F[k - 1] - 2.0 * trace.F[k] + trace.F[k + 1]) / (ds * ds);

  FdCheckReport rep;
  rep.first_diff0 = (trace.F[1] - trace.F[0]) / ds;
  for (int k = 2; k + 2 < n; ++k) {
    const double d1 = trace.d2F_fd[k];
    const double d2 =
        (trace.F[k - 2] - 2.0 * trace.F[k] + trace.F[k + 2]) / (4.0 * ds * ds);
    const double richardson = (4.0 * d1 - d2) / 3.0;
    const double ref = std::abs(trace.d2F_analytic[k]);
    if (ref > 0.0)
      rep.max_rel_dev = std::max(
          rep.max_rel_dev, std::abs(richardson - trace.d2F_analytic[k]) / ref);
    ++rep.richardson_points;
  }
  return rep;
}

MinimalityReport minimality_experiment(const Scenario& sc, int bump_count,
                                       double target_norm, std::uint64_t seed) {
  MinimalityReport rep;
  {
    CoercivityEstimate est = coercivity_constant(sc, std::min(sc.modes, 16));
    rep.coercivity = est.eigenvalue;
    if (est.eigenvalue <= 0.0)
      throw NotCoercive("minimality experiment requires a coercive base state");
  }

  const double f_fine = total_energy(sc, 0.0, sc.nx, sc.ny, sc.bottom, nullptr);
  double tolerance = 1e-12 * std::max(1.0, std::abs(f_fine));
  if (sc.nx >= 16 && sc.ny >= 16) {
    const double f_coarse =
        total_energy(sc, 0.0, sc.nx / 2, sc.ny / 2,
                     BoundaryDensity(resample_half(sc.bottom.values)), nullptr);
    tolerance = std::max(tolerance, std::abs(f_fine - f_coarse) / 3.0);
  }
  rep.tolerance = tolerance;

  const double a = sc.bump.a(), bsup = sc.bump.b();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int t = 0; t < bump_count; ++t) {
    ArrayXd factor(3);
    double surrogate = 0.0;
    BumpPerturbation bump;
    do {
      factor << unif(rng), unif(rng), unif(rng);
      bump = make_window_bump(factor, a, bsup);
      surrogate = bump.c2alpha_surrogate(sc.alpha);
    } while (surrogate < 1e-12);
    bump = bump.scaled(target_norm / surrogate);
    if (t % 2 == 1) bump = bump.scaled(-1.0);
    rep.norms.push_back(bump.c2alpha_surrogate(sc.alpha));

    Scenario pert = sc;
    pert.bump = bump;
    const double f1 = total_energy(pert, 1.0, sc.nx, sc.ny, sc.bottom, nullptr);
    const double margin = f1 - f_fine;
    rep.margins.push_back(margin);
    if (margin > 0.0) ++rep.strictly_positive;
    if (margin < -tolerance) rep.all_within = false;
  }
  return rep;
}

Scenario water_wave_scenario(double q, double g, const PeriodicProfile& profile,
                             int nx, int ny, int modes) {
  QField wave = QField::water_wave(q, g);
  ArrayXd bottom(nx + 1);
  bool degenerate = false;
  for (int i = 0; i <= nx; ++i) {
    const double x = -1.0 + 2.0 * i / nx;
    const double w = profile.value(x);
    const double head = q - 2.0 * g * w;
    if (head <= 0.0) degenerate = true;
    bottom[i] = w * std::sqrt(std::max(head, 0.0));
  }
  if (degenerate) bottom.setConstant(1.0);
  Scenario sc = make_scenario(profile, BoundaryDensity(bottom), wave,
                              BumpPerturbation(), nx, ny, modes);
  sc.water_wave = std::make_pair(q, g);
  return sc;
}

}  // namespace fbstab

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fbstab/flow.hpp"

using namespace fbstab;
namespace {
constexpr double kPi = std::numbers::pi;

PeriodicProfile flat() { return make_profile(ConstantProfileSpec{1.0}); }

PeriodicProfile wavy() {
  FourierProfileSpec spec;
  spec.mean = 1.0;
  spec.cos_coeffs = ArrayXd::Zero(1);
  spec.cos_coeffs[0] = 0.1;
  return make_profile(spec);
}

BumpPerturbation window_bump(double scale = 1.0, double tilt = 0.0) {
  ArrayXd factor(2);
  factor << scale, tilt;
  return make_window_bump(factor, -0.5, 0.5);
}

double sup_norm(const BumpPerturbation& phi, int d, int n = 1024) {
  double m = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = phi.a() + (phi.b() - phi.a()) * i / n;
    const double v = d == 0 ? phi.value(x) : (d == 1 ? phi.d1(x) : phi.d2(x));
    m = std::max(m, std::abs(v));
  }
  return m;
}
}  // namespace

TEST_CASE("characteristics are frozen where phi vanishes") {
  auto w = wavy();
  auto phi = window_bump();
  auto traj = integrate_characteristic(0.8, w, phi, 1.0, 64);  // phi(0.8) = 0
  for (const auto& st : traj.states) {
    CHECK(st.xi == doctest::Approx(0.8));
    CHECK(st.eta == doctest::Approx(w.value(0.8)));
  }
}

TEST_CASE("apex characteristics climb linearly") {
  auto w = flat();
  auto phi = window_bump();  // apex at x=0 with phi'(0)=0
  auto traj = integrate_characteristic(0.0, w, phi, 1.0, 128);
  const double p = phi.value(0.0);
  for (const auto& st : traj.states) {
    CHECK(st.xi == doctest::Approx(0.0));
    CHECK(st.eta == doctest::Approx(1.0 + st.t * p).epsilon(1e-12));
  }
}

TEST_CASE("trajectories respect the C1 drift bound and the vertical strip") {
  auto w = wavy();
  auto phi = window_bump(0.8, 0.5);
  const double wn = 1.1 + 0.1 * kPi;  // sup|w| + sup|w'| on [a,b]
  const double pn0 = sup_norm(phi, 0);
  const double pn1 = pn0 + sup_norm(phi, 1);
  const double bound = 3.0 * (wn + pn0) * pn1;
  for (double x : {-0.31, -0.05, 0.17, 0.42}) {
    auto traj = integrate_characteristic(x, w, phi, 1.0, 256);
    for (const auto& st : traj.states) {
      CHECK(std::abs(st.xi - x) <= bound);
      CHECK(st.xi > phi.a());
      CHECK(st.xi < phi.b());
    }
  }
}

TEST_CASE("step-count guard") {
  auto w = flat();
  auto phi = window_bump();
  CHECK_THROWS_AS(integrate_characteristic(0.0, w, phi, 1.0, 2), StepCountTooSmall);
  CHECK_THROWS_AS(hitting_time(0.5, 0.0, w, phi, 4), StepCountTooSmall);
}

TEST_CASE("hitting time closed cases") {
  auto w = flat();
  auto phi = window_bump();

  auto h0 = hitting_time(0.7, 0.8, w, phi);  // phi = 0 there
  CHECK(h0.t0 == 0.0);
  CHECK(h0.status == HitStatus::Immediate);
  CHECK(h0.g == doctest::Approx(0.8));

  auto ha = hitting_time(0.7, 0.0, w, phi);  // apex of the even bump
  CHECK(ha.t0 == doctest::Approx(0.7));
  CHECK(ha.status == HitStatus::ClosedFormLimit);
  CHECK(ha.residual < 1e-12);

  auto hz = hitting_time(0.0, 0.3, w, phi);
  CHECK(hz.t0 == 0.0);
}

TEST_CASE("generic hits stay within [0,s] with tiny graph defect") {
  auto w = wavy();
  auto phi = window_bump(1.0, 0.4);
  for (double s : {0.25, 0.5, 1.0}) {
    for (double x : {-0.35, -0.1, 0.2, 0.45}) {
      auto hit = hitting_time(s, x, w, phi);
      CHECK(hit.t0 >= 0.0);
      CHECK(hit.t0 <= s);
      CHECK(hit.residual < 1e-12);
      CHECK(std::abs(hit.h - w.value(hit.g) - s * phi.value(hit.g)) < 1e-12);
    }
  }
}

TEST_CASE("eta increases monotonically before the hit where phi > 0") {
  auto w = wavy();
  auto phi = window_bump();
  auto hit = hitting_time(0.9, 0.2, w, phi);
  auto traj = integrate_characteristic(0.2, w, phi, hit.t0, 128);
  for (size_t k = 1; k < traj.states.size(); ++k)
    CHECK(traj.states[k].eta > traj.states[k - 1].eta);
}

TEST_CASE("t0 agrees with the implicit integral relation") {
  auto w = wavy();
  auto phi = window_bump(1.0, 0.4);
  for (double s : {0.4, 1.0}) {
    for (double x : {-0.2, 0.18, 0.37}) {
      auto hit = hitting_time(s, x, w, phi);
      CHECK(t0_implicit_residual(s, x, hit, w, phi, 256) < 1e-6);
    }
  }
  CHECK_THROWS_AS(
      t0_implicit_residual(0.5, 0.8, hitting_time(0.5, 0.8, w, phi), w, phi),
      UndefinedAtZero);
}

TEST_CASE("t0 implicit residual is zero at s=0") {
  auto w = wavy();
  auto phi = window_bump();
  auto hit = hitting_time(0.0, 0.2, w, phi);
  CHECK(t0_implicit_residual(0.0, 0.2, hit, w, phi) < 1e-15);
}

TEST_CASE("T0 closed form") {
  auto w = flat();
  auto phi = window_bump();
  // second branch at the apex
  CHECK(T0_closed_form(0.8, 0.0, w, phi) == doctest::Approx(0.8));

  // arctan difference oracle w'=1, phi'=1, s=1 on a synthetic slope profile
  FourierProfileSpec slope;  // w = 1.6 + (2/pi) sin(pi x): w'(0) = 2... use sin
  slope.mean = 1.6;
  slope.sin_coeffs = ArrayXd::Zero(1);
  slope.sin_coeffs[0] = 1.0 / kPi;  // w'(x) = cos(pi x), w'(0) = 1
  auto ws = make_profile(slope);
  ArrayXd lin(2);
  lin << 0.0, 1.0;  // phi-like polynomial with phi'(0)=1; bypass via direct formula
  // emulate phi'(0)=1 with a window bump rescaled so that phi'(0)=1
  auto raw = window_bump(0.0, 1.0);  // factor x => odd bump, phi'(0) = window(0)
  const double scale = 1.0 / raw.d1(0.0);
  auto phi1 = raw.scaled(scale);
  CHECK(phi1.d1(0.0) == doctest::Approx(1.0));
  CHECK(T0_closed_form(1.0, 0.0, ws, phi1) ==
        doctest::Approx(std::atan(2.0) - std::atan(1.0)).epsilon(1e-12));
}

TEST_CASE("t0 jumps by T0 at the bump endpoint while g stays continuous") {
  auto w = wavy();
  auto phi = window_bump(1.0, 0.3);
  // phi ~ eps^4 near the endpoint, so the detection noise scales like
  // ulp/phi; keep eps large enough that the continuity gap dominates
  const double s = 0.8, a = phi.a();
  const double T0 = T0_closed_form(s, a, w, phi);
  double prev_t0_err = 1e30, prev_g_jump = 1e30;
  for (double eps : {6.4e-2, 3.2e-2, 1.6e-2}) {
    auto hit = hitting_time(s, a + eps, w, phi);
    const double t0_err = std::abs(hit.t0 - T0);
    const double g_jump = std::abs(hit.g - a);
    CHECK(t0_err < prev_t0_err);
    CHECK(g_jump < prev_g_jump);
    prev_t0_err = t0_err;
    prev_g_jump = g_jump;
  }
  CHECK(prev_t0_err < 0.05 * T0);   // one-sided limit reached
  CHECK(hitting_time(s, a, w, phi).t0 == 0.0);  // the discontinuity itself
}

TEST_CASE("flow maps: identity cases and the graph identity") {
  auto w = wavy();
  const ArrayXd grid = uniform_grid(128);

  auto zero = make_bump(ArrayXd::Zero(1), -0.5, 0.5);
  auto m0 = flow_maps(0.7, grid, w, zero);
  CHECK((m0.g - grid).abs().maxCoeff() == 0.0);
  for (int i = 0; i < grid.size(); ++i)
    CHECK(m0.h[i] == doctest::Approx(w.value(grid[i])));

  auto phi = window_bump(1.0, 0.4);
  auto ms0 = flow_maps(0.0, grid, w, phi);
  CHECK((ms0.g - grid).abs().maxCoeff() == 0.0);

  auto m = flow_maps(0.75, grid, w, phi);
  double defect = 0.0;
  for (int i = 0; i < grid.size(); ++i)
    defect = std::max(defect, std::abs(m.h[i] - w.value(m.g[i]) -
                                       0.75 * phi.value(m.g[i])));
  CHECK(defect < 1e-8);
  CHECK((m.t0 >= 0.0).all());
  CHECK((m.t0 <= 0.75).all());
}

TEST_CASE("flow maps symmetry for even data") {
  auto w = flat();
  auto phi = window_bump();  // even bump
  const int n = 64;
  const ArrayXd grid = uniform_grid(n);
  auto m = flow_maps(0.6, grid, w, phi);
  for (int i = 0; i <= n; ++i) {
    const int mi = n - i;  // x -> -x
    CHECK(m.g[i] == doctest::Approx(-m.g[mi]).epsilon(1e-9));
    CHECK(m.h[i] == doctest::Approx(m.h[mi]).epsilon(1e-9));
  }
}

TEST_CASE("partial_s_g closed form matches finite differences of g") {
  auto w = wavy();
  auto phi = window_bump(1.0, 0.4);
  const double ds = 1e-3;
  for (double s : {0.3, 0.7}) {
    for (double x : {-0.2, 0.1, 0.35}) {
      const double gp = hitting_time(s + ds, x, w, phi).g;
      const double gm = hitting_time(s - ds, x, w, phi).g;
      const double fd = (gp - gm) / (2.0 * ds);
      const double g = hitting_time(s, x, w, phi).g;
      CHECK(partial_s_g_closed(s, g, w, phi) == doctest::Approx(fd).epsilon(2e-4));
    }
  }
  // zero at points where phi(g) = 0
  CHECK(partial_s_g_closed(0.5, 0.8, w, phi) == 0.0);
}

TEST_CASE("est1: |partial_s g| <= |phi(g)| everywhere") {
  auto w = wavy();
  auto phi = window_bump(1.0, -0.5);
  const ArrayXd grid = uniform_grid(128);
  for (double s : {0.25, 0.5, 1.0}) {
    auto m = flow_maps(s, grid, w, phi);
    for (int i = 0; i < grid.size(); ++i)
      CHECK(std::abs(m.dgds[i]) <= std::abs(phi.value(m.g[i])) + 1e-15);
  }
}

TEST_CASE("variational route for partial_x g matches finite differences") {
  auto w = wavy();
  auto phi = window_bump(1.0, 0.4);
  const double s = 0.8, dx = 1e-4;
  for (double x : {-0.25, 0.05, 0.3}) {
    const double fd = (hitting_time(s, x + dx, w, phi).g -
                       hitting_time(s, x - dx, w, phi).g) / (2.0 * dx);
    auto hit = hitting_time(s, x, w, phi);
    const double W1g = w.d1(hit.g) + s * phi.d1(hit.g);
    const double dgdx = (hit.dxi_dx + W1g * hit.deta_dx) / (1.0 + W1g * W1g);
    CHECK(dgdx == doctest::Approx(fd).epsilon(5e-5));
  }
}

TEST_CASE("partial_x g at zeros of phi") {
  auto w = flat();
  // bump with an interior simple zero at x=0: factor(x) = x
  auto raw = window_bump(0.0, 1.0);
  const double scale = 1.0 / raw.d1(0.0);  // phi'(0) = 1 after scaling
  auto phi = raw.scaled(scale);

  CHECK(partial_x_g_at_zero(1.0, 0.0, w, phi) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK_THROWS_AS(partial_x_g_at_zero(0.5, 0.2, w, phi), NotAZero);

  // one-sided finite difference across the zero
  const double s = 1.0;
  double prev = 1e30;
  for (double eps : {2e-2, 1e-2, 5e-3}) {
    const double fd = (hitting_time(s, eps, w, phi).g -
                       hitting_time(s, 0.0, w, phi).g) / eps;
    const double err = std::abs(fd - 1.0 / std::sqrt(2.0));
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 2e-2);

  // quadruple zeros at the support endpoints give ratio 1
  auto even = window_bump();
  CHECK(partial_x_g_at_zero(0.7, even.a(), flat(), even) == doctest::Approx(1.0));
}

TEST_CASE("tangential residual vanishes to round-off") {
  auto w = wavy();
  auto phi = window_bump(1.0, 0.4);
  const ArrayXd grid = uniform_grid(128);
  for (double s : {0.25, 0.5, 1.0}) {
    auto m = flow_maps(s, grid, w, phi);
    CHECK(tangential_residual(m, w, phi) < 1e-12);
  }
  auto zero = make_bump(ArrayXd::Zero(1), -0.5, 0.5);
  auto mz = flow_maps(0.5, grid, w, zero);
  CHECK(tangential_residual(mz, w, zero) == 0.0);
}

TEST_CASE("normal velocity at s=0 and under zero bump") {
  auto w = wavy();
  auto phi = window_bump(1.0, 0.2);
  const int n = 64;
  const ArrayXd grid = uniform_grid(n);
  auto m = flow_maps(0.0, grid, w, phi);
  auto vel = normal_velocity(m);
  for (int i = 0; i <= n; ++i) {
    const double x = grid[i];
    const double expect = phi.value(x) / std::sqrt(1.0 + w.d1(x) * w.d1(x));
    CHECK(vel.values[i] == doctest::Approx(expect).epsilon(1e-10));
  }
  auto zero = make_bump(ArrayXd::Zero(1), -0.5, 0.5);
  auto mz = flow_maps(0.4, grid, w, zero);
  CHECK(normal_velocity(mz).values.abs().maxCoeff() == 0.0);
}

TEST_CASE("acceleration factor matches a second s-difference oracle") {
  auto w = wavy();
  auto phi = window_bump(1.0, 0.4);
  const double s = 0.5, ds = 0.02;
  const ArrayXd grid = uniform_grid(32);
  auto m = flow_maps(s, grid, w, phi);
  auto mp = flow_maps(s + ds, grid, w, phi);
  auto mm = flow_maps(s - ds, grid, w, phi);
  auto acc = acceleration_normal(m);
  for (int i = 6; i <= 26; ++i) {
    const double x = grid[i];
    if (std::abs(phi.value(x)) < 1e-10) continue;
    const double d2g = (mp.g[i] - 2.0 * m.g[i] + mm.g[i]) / (ds * ds);
    const double d2h = (mp.h[i] - 2.0 * m.h[i] + mm.h[i]) / (ds * ds);
    const double W1g = w.d1(m.g[i]) + s * phi.d1(m.g[i]);
    const double r = std::sqrt(1.0 + w.d1(x) * w.d1(x));
    const double oracle = (-W1g * d2g + d2h) / r;
    CHECK(acc.values[i] == doctest::Approx(oracle).epsilon(5e-3));
  }
  // flat apex: both terms vanish
  auto mf = flow_maps(0.5, ArrayXd::Constant(1, 0.0), flat(), window_bump());
  CHECK(std::abs(acceleration_normal(mf).values[0]) < 1e-12);
}

TEST_CASE("conservation law holds along trajectories") {
  auto w = wavy();
  auto phi = window_bump(1.0, 0.4);

  // apex-like trajectory on the flat strip: integrand is exactly 1
  {
    auto fw = flat();
    auto fphi = window_bump();
    auto hit = hitting_time(0.9, 0.0, fw, fphi);
    auto traj = integrate_characteristic(0.0, fw, fphi, hit.t0, 256);
    CHECK(conservation_residual(traj, fw, fphi) < 1e-10);  // roundoff / phi
  }

  for (double x : {-0.2, 0.15, 0.38}) {
    auto hit = hitting_time(1.0, x, w, phi);
    auto traj = integrate_characteristic(x, w, phi, hit.t0, 256);
    CHECK(conservation_residual(traj, w, phi) < 1e-6);
  }

  // throws when phi vanishes along the trajectory
  auto tz = integrate_characteristic(0.8, w, phi, 0.5, 64);
  CHECK_THROWS_AS(conservation_residual(tz, w, phi), UndefinedAtZero);
}

TEST_CASE("derivative bounds scale linearly in the bump size") {
  auto w = wavy();
  auto phi0 = window_bump(1.0, 0.3);
  auto rep = derivative_bounds_check(w, phi0, {0.2, 0.1}, 81, 128);
  REQUIRE(rep.entries.size() == 2);
  CHECK(rep.sign_preserved);
  const double ratio_g = rep.entries[1].sup_dgdx / rep.entries[0].sup_dgdx;
  const double ratio_xi = rep.entries[1].sup_dxi / rep.entries[0].sup_dxi;
  CHECK(ratio_g > 0.3);
  CHECK(ratio_g < 0.7);
  CHECK(ratio_xi > 0.3);
  CHECK(ratio_xi < 0.7);
  CHECK(rep.slope_dgdx > 0.5);   // fitted log-log slope, expected ~ 1
  CHECK(rep.slope_dgdx < 1.75);
  CHECK(rep.slope_dxi > 0.5);
  CHECK(rep.slope_dxi < 1.75);

  auto rep0 = derivative_bounds_check(w, phi0, {0.0}, 17, 64);
  CHECK(rep0.entries[0].sup_dgdx == 0.0);
  CHECK(rep0.entries[0].sup_dxi == 0.0);
}

TEST_CASE("cutoff is a C2 ramp with the slope bound") {
  auto w = wavy();
  FlowBox box = default_flow_box(w);
  DiffeoFamily fam(w, window_bump(), box);
  CHECK(fam.cutoff(box.L) == 0.0);
  CHECK(fam.cutoff(box.L + box.delta0) == 1.0);
  CHECK(fam.cutoff(box.M + 2.0) == 0.0);
  CHECK(fam.cutoff(0.5 * (box.L + box.M)) == 1.0);
  double max_slope = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double y = box.L - 0.1 + (box.M + 2.2 - box.L) * i / 2000.0;
    max_slope = std::max(max_slope, std::abs(fam.cutoff_d1(y)));
    // finite-difference consistency of the derivative
    const double h = 1e-6;
    const double fd = (fam.cutoff(y + h) - fam.cutoff(y - h)) / (2.0 * h);
    CHECK(fam.cutoff_d1(y) == doctest::Approx(fd).epsilon(1e-4));
  }
  CHECK(max_slope <= 2.0 / box.delta0 + 1e-9);
}

TEST_CASE("diffeomorphism family: identity, support, boundary image") {
  auto w = wavy();
  auto phi = window_bump(1.0, 0.3);
  FlowBox box = default_flow_box(w);
  auto fam = build_diffeo(w, phi, 1.0, box);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(-0.999, 0.999), uy(0.01, box.M + 2.5);
  for (int k = 0; k < 100; ++k) {
    const double x = ux(rng), y = uy(rng);
    const Vector2d p = fam.map(0.0, x, y);
    CHECK(p[0] == doctest::Approx(x));
    CHECK(p[1] == doctest::Approx(y));
  }
  // identity outside U
  for (double s : {0.3, 1.0}) {
    const Vector2d p1 = fam.map(s, 0.7, 1.0);   // x outside [a,b]
    CHECK(p1[0] == 0.7);
    CHECK(p1[1] == 1.0);
    const Vector2d p2 = fam.map(s, 0.0, box.L * 0.5);  // y below the cutoff
    CHECK(p2[0] == 0.0);
    CHECK(p2[1] == doctest::Approx(box.L * 0.5));
  }
  // on Gamma the map lands on the perturbed graph
  for (double s : {0.4, 1.0}) {
    for (double x : {-0.3, 0.0, 0.25}) {
      const Vector2d p = fam.map(s, x, w.value(x));
      CHECK(std::abs(p[1] - w.value(p[0]) - s * phi.value(p[0])) < 1e-8);
    }
  }
}

TEST_CASE("diffeomorphism jacobian matches finite differences") {
  auto w = wavy();
  auto phi = window_bump(1.0, 0.3);
  FlowBox box = default_flow_box(w);
  auto fam = build_diffeo(w, phi, 0.8, box);
  const double h = 1e-5;
  for (double x : {-0.2, 0.1}) {
    for (double y : {0.9, box.L + 0.5 * box.delta0}) {
      const Matrix2d J = fam.jacobian(0.8, x, y);
      for (int comp = 0; comp < 2; ++comp) {
        const double fdx = (fam.map(0.8, x + h, y)[comp] - fam.map(0.8, x - h, y)[comp]) / (2.0 * h);
        const double fdy = (fam.map(0.8, x, y + h)[comp] - fam.map(0.8, x, y - h)[comp]) / (2.0 * h);
        CHECK(J(comp, 0) == doctest::Approx(fdx).epsilon(1e-5));
        CHECK(J(comp, 1) == doctest::Approx(fdy).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("build_diffeo rejects bad cutoff constants and huge bumps") {
  auto w = wavy();
  auto phi = window_bump();
  FlowBox box = default_flow_box(w);
  FlowBox bad = box;
  bad.delta0 = 2.0;
  CHECK_THROWS_AS(build_diffeo(w, phi, 0.5, bad), CutoffInfeasible);
  bad = box;
  bad.L = 0.6 * w.min_value();
  CHECK_THROWS_AS(build_diffeo(w, phi, 0.5, bad), CutoffInfeasible);
  CHECK_THROWS_AS(build_diffeo(w, phi.scaled(400.0), 1.0, box), NotInjective);
}

TEST_CASE("variational pair at a frozen seed follows the rotation closed form") {
  // at a zero of phi the trajectory freezes and the x-derivative system
  // becomes a rotation with angular rate phi'(x0):
  //   dxi/dx = cos(p1 t) - w'(x0) sin(p1 t),  deta/dx = w'(x0) cos(p1 t) + sin(p1 t)
  FourierProfileSpec spec;
  spec.mean = 1.0;
  spec.sin_coeffs = ArrayXd::Zero(1);
  spec.sin_coeffs[0] = 0.1;  // w'(0) = 0.1 pi != 0
  auto w = make_profile(spec);
  auto raw = window_bump(0.0, 1.0);
  auto phi = raw.scaled(1.0 / raw.d1(0.0));  // interior zero at 0 with phi'(0)=1
  const double w1 = w.d1(0.0), p1 = phi.d1(0.0);
  auto traj = integrate_characteristic(0.0, w, phi, 1.0, 256);
  for (const auto& st : traj.states) {
    CHECK(st.xi == doctest::Approx(0.0));
    CHECK(st.dxi_dx ==
          doctest::Approx(std::cos(p1 * st.t) - w1 * std::sin(p1 * st.t)).epsilon(1e-9));
    CHECK(st.deta_dx ==
          doctest::Approx(w1 * std::cos(p1 * st.t) + std::sin(p1 * st.t)).epsilon(1e-9));
  }
}

TEST_CASE("flow invariants hold across randomized scenarios") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    FourierProfileSpec spec;
    spec.mean = 0.8 + 0.6 * unif(rng);
    spec.cos_coeffs = ArrayXd::Zero(2);
    spec.sin_coeffs = ArrayXd::Zero(2);
    for (int k = 0; k < 2; ++k) {
      spec.cos_coeffs[k] = 0.08 * (2.0 * unif(rng) - 1.0);
      spec.sin_coeffs[k] = 0.08 * (2.0 * unif(rng) - 1.0);
    }
    auto w = make_profile(spec);

    const double a = -0.9 + 0.5 * unif(rng);
    const double b = 0.2 + 0.6 * unif(rng);
    ArrayXd factor(2);
    factor << 4.0 * (2.0 * unif(rng) - 1.0), 2.0 * (2.0 * unif(rng) - 1.0);
    auto phi = make_window_bump(factor, a, b);
    const double s = 0.05 + 0.95 * unif(rng);

    const ArrayXd grid = uniform_grid(48);
    auto maps = flow_maps(s, grid, w, phi, 128);
    for (int i = 0; i < grid.size(); ++i) {
      CHECK(maps.t0[i] >= 0.0);
      CHECK(maps.t0[i] <= s);
      CHECK(std::abs(maps.h[i] - w.value(maps.g[i]) - s * phi.value(maps.g[i])) < 1e-8);
      CHECK(std::abs(maps.dgds[i]) <= std::abs(phi.value(maps.g[i])) + 1e-14);
    }
    CHECK(tangential_residual(maps, w, phi) < 1e-12);
  }
}

TEST_CASE("admissibility report on a small bump") {
  auto w = wavy();
  auto phi = window_bump(1.0, 0.3);
  auto fam = build_diffeo(w, phi, 1.0, default_flow_box(w));
  auto rep = admissibility_report(fam, {0.25, 0.5, 0.75, 1.0});
  CHECK(rep.admissible());
  CHECK(rep.identity_defect_at_zero < 1e-12);
  CHECK(rep.support_defect == 0.0);
  CHECK(rep.image_defect < 1e-8);
  CHECK(rep.max_dphi_minus_identity < 1.0);

  // the zero bump passes trivially
  auto zero = make_bump(ArrayXd::Zero(1), -0.5, 0.5);
  auto famz = build_diffeo(w, zero, 1.0, default_flow_box(w));
  CHECK(admissibility_report(famz, {0.5, 1.0}).admissible());
}

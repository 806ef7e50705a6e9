#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fbstab/harness.hpp"
#include "fbstab/variation.hpp"

using namespace fbstab;
namespace {
constexpr double kPi = std::numbers::pi;

Scenario flat_critical(int nx = 128, int ny = 64) {
  auto w = make_profile(ConstantProfileSpec{1.0});
  return make_scenario(w, BoundaryDensity::constant(1.0, nx),
                       QField::constant(1.0), BumpPerturbation(), nx, ny, 16);
}

Scenario flat_critical_with_bump(double scale, int nx = 128, int ny = 64) {
  Scenario sc = flat_critical(nx, ny);
  ArrayXd factor(1);
  factor << scale;
  sc.bump = make_window_bump(factor, -0.5, 0.5);
  return sc;
}

// flat strip with Q^2 = q - 2 g y: critical for u* = sqrt(q - 2g)
Scenario flat_wave(double q, double g, int nx = 128, int ny = 64) {
  auto w = make_profile(ConstantProfileSpec{1.0});
  auto sc = make_scenario(w, BoundaryDensity::constant(std::sqrt(q - 2.0 * g), nx),
                          QField::water_wave(q, g), BumpPerturbation(), nx, ny, 16);
  sc.water_wave = std::make_pair(q, g);
  return sc;
}

double mode_oracle(int k) {  // flat strip, Q == 1
  if (k == 0) return 2.0;
  const double kt = k * kPi;
  return 2.0 * kt * std::cosh(kt) / std::sinh(kt);
}
}  // namespace

TEST_CASE("criticality guard accepts the flat strip and rejects mismatched Q") {
  CHECK_NOTHROW(require_critical(flat_critical()));
  Scenario bad = flat_critical();
  bad.q_field = QField::constant(2.0);
  CHECK_THROWS_AS(require_critical(bad), NotCritical);
}

TEST_CASE("first variation values") {
  Scenario sc = flat_critical();
  const StripDomain dom = sc.domain(0.0);
  auto u = solve_harmonic(dom, sc.bottom, BoundaryDensity::constant(0.0, sc.nx));

  // critical: vanishes for any velocity
  auto vel = BoundaryDensity::sample([](double x) { return std::cos(kPi * x) + 0.5; }, sc.nx);
  CHECK(std::abs(first_variation(u, sc.q_field, dom, vel)) < 1e-8);

  // Q == 2 with unit flux: (4-1)*|Gamma| = 6
  CHECK(first_variation(u, QField::constant(2.0), dom,
                        BoundaryDensity::constant(1.0, sc.nx)) ==
        doctest::Approx(6.0).epsilon(1e-8));

  CHECK(first_variation(u, sc.q_field, dom, BoundaryDensity::constant(0.0, sc.nx)) == 0.0);
}

TEST_CASE("second variation form against the cosine oracle") {
  Scenario sc = flat_critical(256, 128);
  for (int k : {1, 2, 3}) {
    auto psi = BoundaryDensity::sample([k](double x) { return std::cos(k * kPi * x); }, sc.nx);
    auto rep = second_variation_form(psi, sc);
    const double oracle = 2.0 * k * kPi / std::tanh(k * kPi);
    CHECK(rep.boundary == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(rep.total == doctest::Approx(oracle).epsilon(0.01));
  }
  auto zero = second_variation_form(BoundaryDensity::constant(0.0, sc.nx), sc);
  CHECK(zero.total == doctest::Approx(0.0));
}

TEST_CASE("second variation form with a linear-in-y weight") {
  // Q^2 = 4 - 3y: d_nu Q^2 = -3 on the flat boundary, Q = 1 there
  Scenario sc = flat_wave(4.0, 1.5);
  auto rep = second_variation_form(BoundaryDensity::constant(1.0, sc.nx), sc);
  CHECK(rep.bulk == doctest::Approx(4.0).epsilon(1e-9));       // u_psi = y
  CHECK(rep.boundary == doctest::Approx(-6.0).epsilon(1e-9));  // -3 * |Gamma|
  CHECK(rep.total == doctest::Approx(-2.0).epsilon(1e-8));
}

TEST_CASE("quadratic form is homogeneous of degree two and bulk-positive") {
  Scenario sc = flat_critical();
  auto psi = BoundaryDensity::sample([](double x) { return std::sin(2.0 * kPi * x); }, sc.nx);
  auto r1 = second_variation_form(psi, sc);
  BoundaryDensity psi3(psi.values * 3.0);
  auto r3 = second_variation_form(psi3, sc);
  CHECK(r3.total == doctest::Approx(9.0 * r1.total).epsilon(1e-10));
  CHECK(r1.bulk > 0.0);
}

TEST_CASE("NotCritical guards the simplified form") {
  Scenario sc = flat_critical();
  sc.q_field = QField::constant(2.0);
  auto psi = BoundaryDensity::constant(1.0, sc.nx);
  CHECK_THROWS_AS(second_variation_form(psi, sc), NotCritical);
}

TEST_CASE("coercivity on the flat strip matches the per-mode oracle") {
  Scenario sc = flat_critical(256, 128);
  auto est = coercivity_constant(sc, 8);
  CHECK(est.eigenvalue > 0.0);
  double oracle = mode_oracle(0) / h_half_weight(sc.profile, 0);
  for (int k = 1; k <= 8; ++k)
    oracle = std::min(oracle, mode_oracle(k) / h_half_weight(sc.profile, 2 * k - 1));
  CHECK(est.eigenvalue == doctest::Approx(oracle).epsilon(0.05));
  CHECK(est.max_offdiag < 1e-8);
  CHECK(est.asymmetry < 1e-6);

  // enlarging the trial space cannot increase the minimum
  auto est16 = coercivity_constant(sc, 16);
  CHECK(est16.eigenvalue <= est.eigenvalue + 1e-12);
  CHECK(est16.eigenvalue == doctest::Approx(est.eigenvalue).epsilon(0.05));
}

TEST_CASE("strongly negative boundary coefficient flips the sign") {
  // c1 = d_nu Q^2 = -3 < -2 = -min_k bulk oracle: the constant mode goes negative
  Scenario sc = flat_wave(4.0, 1.5);
  auto est = coercivity_constant(sc, 8);
  CHECK(est.eigenvalue < 0.0);
  CHECK(est.eigenvalue == doctest::Approx(-1.0).epsilon(0.03));
}

TEST_CASE("QminViolated for degenerate weights") {
  Scenario sc = flat_critical();
  sc.q_field = QField::water_wave(2.0, 1.0);  // Q = 0 on Gamma
  CHECK_THROWS_AS(coercivity_constant(sc, 4), QminViolated);
  CHECK_THROWS_AS(tubular_coercivity(sc, 0.1, 4), QminViolated);
}

TEST_CASE("mu_epsilon diverges like 1/epsilon on the flat strip") {
  Scenario sc = flat_critical();
  double prev = 0.0;
  for (double eps : {0.2, 0.1, 0.05}) {
    const double mu = mu_epsilon(sc, eps, 8);
    CHECK(eps * mu > 0.8);
    CHECK(eps * mu < 1.3);
    CHECK(mu > prev);
    prev = mu;
  }
  CHECK_THROWS_AS(mu_epsilon(sc, 1.5, 4), EpsilonTooLarge);
}

TEST_CASE("mu_epsilon also diverges on a curved profile") {
  FourierProfileSpec spec;
  spec.mean = 1.0;
  spec.cos_coeffs = ArrayXd::Zero(1);
  spec.cos_coeffs[0] = 0.1;
  auto w = make_profile(spec);
  auto sc = make_scenario(w, BoundaryDensity::constant(1.0, 128),
                          QField::constant(1.0), BumpPerturbation(), 128, 64, 8);
  double prev = 0.0;
  for (double eps : {0.2, 0.1, 0.05}) {
    const double mu = mu_epsilon(sc, eps, 8);
    CHECK(mu > prev);
    prev = mu;
  }
  CHECK(prev > 1.0 / 0.05 * 0.5);  // same 1/eps scale as the flat strip
}

TEST_CASE("cross-module identity holds on the water-wave scenario") {
  Scenario sc = flat_wave(4.0, 1.0, 192, 96);
  ArrayXd factor(1);
  factor << 3.0;
  sc.bump = make_window_bump(factor, -0.5, 0.5);
  const ArrayXd grid = uniform_grid(sc.nx);
  auto maps = flow_maps(0.0, grid, sc.profile, sc.bump, sc.flow_steps);
  auto rep = second_variation_along_flow(0.0, sc, maps);
  auto form = second_variation_form(normal_velocity(maps), sc);
  CHECK(form.boundary < 0.0);  // d_nu Q^2 = -2g on the flat boundary
  CHECK(rep.second == doctest::Approx(form.total).epsilon(0.02));
}

TEST_CASE("mu_epsilon constant-mode-only value is the linear profile energy") {
  Scenario sc = flat_critical();
  const double eps = 0.1;
  const double mu = mu_epsilon(sc, eps, 0);
  CHECK(mu == doctest::Approx(1.0 / eps).epsilon(1e-9));
}

TEST_CASE("tubular coercivity is positive for Q=1 and grows as eps shrinks") {
  Scenario sc = flat_critical();
  auto e1 = tubular_coercivity(sc, 0.1, 8);
  CHECK(e1.eigenvalue > 0.0);
  CHECK(e1.mu.has_value());
  auto e2 = tubular_coercivity(sc, 0.05, 8);
  CHECK(e2.eigenvalue >= e1.eigenvalue - 1e-12);
}

TEST_CASE("tubular coercivity detects instability for large eps") {
  Scenario sc = flat_wave(4.0, 1.5);
  auto est = tubular_coercivity(sc, 0.8, 8);
  CHECK(est.eigenvalue < 0.0);
}

TEST_CASE("second variation along the flow at s=0 reduces to the simplified form") {
  Scenario sc = flat_critical_with_bump(4.0, 256, 128);
  const ArrayXd grid = uniform_grid(sc.nx);
  auto maps = flow_maps(0.0, grid, sc.profile, sc.bump, sc.flow_steps);
  auto rep = second_variation_along_flow(0.0, sc, maps);

  // psi = X_0 . nu = phi on the flat strip
  auto psi = BoundaryDensity::sample([&](double x) { return sc.bump.value(x); }, sc.nx);
  auto form = second_variation_form(psi, sc);
  CHECK(rep.second == doctest::Approx(form.total).epsilon(0.02));
  CHECK(std::abs(rep.defect_term) < 0.02 * std::abs(rep.second));
  CHECK(std::abs(rep.first) < 1e-6);
}

TEST_CASE("second variation along the flow vanishes for the zero bump") {
  Scenario sc = flat_critical();
  const ArrayXd grid = uniform_grid(sc.nx);
  auto maps = flow_maps(0.5, grid, sc.profile, sc.bump, sc.flow_steps);
  auto rep = second_variation_along_flow(0.5, sc, maps);
  CHECK(rep.bulk == doctest::Approx(0.0));
  CHECK(rep.boundary_term == doctest::Approx(0.0));
  CHECK(rep.defect_term == doctest::Approx(0.0));
  CHECK(rep.first == doctest::Approx(0.0));
}

TEST_CASE("defect term stays small for small bumps at positive s") {
  Scenario sc = flat_critical_with_bump(2.0, 128, 64);
  const ArrayXd grid = uniform_grid(sc.nx);
  for (double s : {0.3, 0.8}) {
    auto maps = flow_maps(s, grid, sc.profile, sc.bump, sc.flow_steps);
    auto rep = second_variation_along_flow(s, sc, maps);
    CHECK(std::abs(rep.defect_term) < 0.1 * std::abs(rep.bulk));
  }
}

TEST_CASE("trace equivalence report") {
  Scenario sc = flat_critical();
  ArrayXd factor(1);
  factor << 1.0;
  sc.bump = make_window_bump(factor, -0.5, 0.5);  // fixes U = (a,b) x (L, M+2)

  std::vector<BoundaryDensity> psis;
  // zero density: both sides vanish
  psis.push_back(BoundaryDensity::constant(0.0, sc.nx));
  auto rep0 = trace_equivalence_check(sc, psis);
  CHECK(rep0.energies[0] == doctest::Approx(0.0));
  CHECK(rep0.h_half_sq[0] == doctest::Approx(0.0));

  // band-limited densities windowed into (a,b)
  psis.clear();
  for (int t = 0; t < 8; ++t) {
    psis.push_back(BoundaryDensity::sample(
        [t](double x) {
          if (x <= -0.5 || x >= 0.5) return 0.0;
          const double win = std::pow((x + 0.5) * (0.5 - x) * 4.0, 2.0);
          return win * (std::cos((t + 1) * kPi * x) + 0.3 * std::sin((t + 2) * kPi * x));
        },
        sc.nx, true));
  }
  auto rep = trace_equivalence_check(sc, psis);
  CHECK(rep.ratio_min > 1e-3);
  CHECK(rep.ratio_max < 1e3);
  CHECK(rep.ratio_max / rep.ratio_min < 100.0);

  // homogeneity: scaling psi by 2 scales both sides by 4
  std::vector<BoundaryDensity> pair = {psis[0],
                                       BoundaryDensity(psis[0].values * 2.0, true)};
  auto rep2 = trace_equivalence_check(sc, pair);
  CHECK(rep2.energies[1] == doctest::Approx(4.0 * rep2.energies[0]).epsilon(1e-10));
  CHECK(rep2.h_half_sq[1] == doctest::Approx(4.0 * rep2.h_half_sq[0]).epsilon(1e-10));
}

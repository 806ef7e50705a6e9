#include "fbstab/flow.hpp"

#include <cmath>
#include <random>

namespace fbstab {

namespace {

constexpr double kZeroTol = 1e-14;

struct Rhs {
  const PeriodicProfile& w;
  const BumpPerturbation& phi;

  void operator()(const double y[4], double f[4]) const {
    const double xi = y[0], eta = y[1], dxi = y[2], deta = y[3];
    const double w0 = w.value(xi), w1 = w.d1(xi), w2 = w.d2(xi);
    const double p0 = phi.value(xi), p1 = phi.d1(xi), p2 = phi.d2(xi);
    f[0] = -w1 * p0 - (eta - w0) * p1;
    f[1] = p0;
    f[2] = -(w2 * p0 + (eta - w0) * p2) * dxi - p1 * deta;
    f[3] = p1 * dxi;
  }
};

void rk4_step(const Rhs& rhs, const double y[4], double h, double out[4]) {
  double k1[4], k2[4], k3[4], k4[4], tmp[4];
  rhs(y, k1);
  for (int c = 0; c < 4; ++c) tmp[c] = y[c] + 0.5 * h * k1[c];
  rhs(tmp, k2);
  for (int c = 0; c < 4; ++c) tmp[c] = y[c] + 0.5 * h * k2[c];
  rhs(tmp, k3);
  for (int c = 0; c < 4; ++c) tmp[c] = y[c] + h * k3[c];
  rhs(tmp, k4);
  for (int c = 0; c < 4; ++c)
    out[c] = y[c] + h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
}

double graph_defect(double s, const double y[4], const PeriodicProfile& w,
                    const BumpPerturbation& phi) {
  return y[1] - w.value(y[0]) - s * phi.value(y[0]);
}

// First hit of the stored trajectory with the graph of w + r phi: scans the
// nodes for a sign change and refines within the bracketing step.
bool hit_on_trajectory(const Trajectory& traj, double r,
                       const PeriodicProfile& w, const BumpPerturbation& phi,
                       double* t_hit, double state_out[4]) {
  const Rhs rhs{w, phi};
  auto defect = [&](const CharacteristicState& st) {
    return st.eta - w.value(st.xi) - r * phi.value(st.xi);
  };
  const double f0 = defect(traj.states.front());
  if (std::abs(f0) < 1e-13) {
    *t_hit = traj.states.front().t;
    state_out[0] = traj.states.front().xi;
    state_out[1] = traj.states.front().eta;
    state_out[2] = traj.states.front().dxi_dx;
    state_out[3] = traj.states.front().deta_dx;
    return true;
  }
  for (size_t k = 1; k < traj.states.size(); ++k) {
    const double fk = defect(traj.states[k]);
    if (f0 * fk > 0.0) continue;
    const auto& base = traj.states[k - 1];
    double y0[4] = {base.xi, base.eta, base.dxi_dx, base.deta_dx};
    double lo = 0.0, hi = traj.states[k].t - base.t;
    double yhi[4];
    rk4_step(rhs, y0, hi, yhi);
    for (int it = 0; it < 90 && hi - lo > 1e-16; ++it) {
      const double mid = 0.5 * (lo + hi);
      double ym[4];
      rk4_step(rhs, y0, mid, ym);
      const double fm = ym[1] - w.value(ym[0]) - r * phi.value(ym[0]);
      if (f0 * fm > 0.0) {
        lo = mid;
      } else {
        hi = mid;
        for (int c = 0; c < 4; ++c) yhi[c] = ym[c];
      }
    }
    *t_hit = base.t + hi;
    for (int c = 0; c < 4; ++c) state_out[c] = yhi[c];
    return true;
  }
  return false;
}

double smoothstep_quintic(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double smoothstep_quintic_d1(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  const double v = u * (1.0 - u);
  return 30.0 * v * v;
}

double fitted_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const int n = static_cast<int>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

Trajectory integrate_characteristic(double x, const PeriodicProfile& w,
                                    const BumpPerturbation& phi, double t_end,
                                    int steps) {
  if (steps < 8) throw StepCountTooSmall("characteristic integration needs >= 8 steps");
  if (t_end < 0.0) throw Error("t_end must be nonnegative");
  const Rhs rhs{w, phi};
  Trajectory traj;
  traj.seed = x;
  traj.states.resize(steps + 1);
  double y[4] = {x, w.value(x), 1.0, w.d1(x)};
  const double h = t_end / steps;
  traj.states[0] = {0.0, y[0], y[1], y[2], y[3]};
  for (int k = 1; k <= steps; ++k) {
    double out[4];
    rk4_step(rhs, y, h, out);
    for (int c = 0; c < 4; ++c) y[c] = out[c];
    traj.states[k] = {k * h, y[0], y[1], y[2], y[3]};
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Hitting time
// ---------------------------------------------------------------------------

HitResult hitting_time(double s, double x, const PeriodicProfile& w,
                       const BumpPerturbation& phi, int steps) {
  if (steps < 8) throw StepCountTooSmall("hitting_time needs >= 8 steps");
  if (s < 0.0 || s > 1.0) throw Error("hitting_time requires s in [0,1]");
  HitResult hit;
  const double p0 = phi.value(x);
  if (s == 0.0 || std::abs(p0) < kZeroTol) {
    hit.t0 = 0.0;
    hit.g = x;
    hit.h = w.value(x);
    hit.dxi_dx = 1.0;
    hit.deta_dx = w.d1(x);
    hit.status = HitStatus::Immediate;
    hit.residual = 0.0;
    return hit;
  }
  if (std::abs(phi.d1(x)) < kZeroTol && std::abs(w.d1(x)) < kZeroTol) {
    // xi stays frozen and eta climbs linearly: the hit occurs exactly at t=s
    Trajectory traj = integrate_characteristic(x, w, phi, s, steps);
    const auto& st = traj.states.back();
    hit.t0 = s;
    hit.g = st.xi;
    hit.h = st.eta;
    hit.dxi_dx = st.dxi_dx;
    hit.deta_dx = st.deta_dx;
    hit.status = HitStatus::ClosedFormLimit;
    double y[4] = {st.xi, st.eta, st.dxi_dx, st.deta_dx};
    hit.residual = std::abs(graph_defect(s, y, w, phi));
    return hit;
  }

  const double horizon = s * (1.0 + 1e-3) + 1e-12;
  Trajectory traj = integrate_characteristic(x, w, phi, horizon, steps);
  double t_hit = 0.0;
  double state[4];
  if (!hit_on_trajectory(traj, s, w, phi, &t_hit, state))
    throw NoHitDetected("no graph crossing before t = " + std::to_string(horizon) +
                        " for seed x = " + std::to_string(x));
  if (t_hit > s) {
    // clamp to the theoretical bound and re-evaluate the state at t = s
    const double dt = traj.dt();
    const int k = std::min<int>(static_cast<int>(s / dt), steps - 1);
    const auto& base = traj.states[k];
    double y0[4] = {base.xi, base.eta, base.dxi_dx, base.deta_dx};
    rk4_step(Rhs{w, phi}, y0, s - base.t, state);
    t_hit = s;
  }
  hit.t0 = t_hit;
  hit.g = state[0];
  hit.h = state[1];
  hit.dxi_dx = state[2];
  hit.deta_dx = state[3];
  hit.status = HitStatus::Detected;
  hit.residual = std::abs(graph_defect(s, state, w, phi));
  return hit;
}

// ---------------------------------------------------------------------------
// Flow maps
// ---------------------------------------------------------------------------

FlowMaps flow_maps(double s, const ArrayXd& x_grid, const PeriodicProfile& w,
                   const BumpPerturbation& phi, int steps) {
  const int n = static_cast<int>(x_grid.size());
  FlowMaps maps;
  maps.s = s;
  maps.x = x_grid;
  maps.g.resize(n);
  maps.h.resize(n);
  maps.t0.resize(n);
  maps.dgdx.resize(n);
  maps.dgds.resize(n);
  maps.vel_nu.resize(n);
  maps.acc_nu.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = x_grid[i];
    const HitResult hit = hitting_time(s, x, w, phi, steps);
    maps.g[i] = hit.g;
    maps.h[i] = hit.h;
    maps.t0[i] = hit.t0;
    const double g = hit.g;
    const double W1g = w.d1(g) + s * phi.d1(g);
    const double denom = 1.0 + W1g * W1g;
    if (std::abs(phi.value(x)) < kZeroTol) {
      maps.dgdx[i] = partial_x_g_at_zero(s, x, w, phi);
    } else {
      maps.dgdx[i] = (hit.dxi_dx + W1g * hit.deta_dx) / denom;
    }
    maps.dgds[i] = partial_s_g_closed(s, g, w, phi);
    maps.vel_nu[i] = phi.value(g) / std::sqrt(denom);
    const double W2g = w.d2(g) + s * phi.d2(g);
    const double w1x = w.d1(x);
    maps.acc_nu[i] = (W2g * maps.dgds[i] * maps.dgds[i] +
                      2.0 * phi.d1(g) * maps.dgds[i]) /
                     std::sqrt(1.0 + w1x * w1x);
  }
  return maps;
}

// ---------------------------------------------------------------------------
// Closed forms and residuals
// ---------------------------------------------------------------------------

double t0_implicit_residual(double s, double x, const HitResult& hit,
                            const PeriodicProfile& w,
                            const BumpPerturbation& phi, int quad_nodes,
                            int steps) {
  if (std::abs(phi.value(x)) < kZeroTol)
    throw UndefinedAtZero("t0_implicit_residual requires phi(x) != 0");
  if (quad_nodes % 2 == 1) ++quad_nodes;
  // one trajectory serves all intermediate hits: t0(r,x) <= t0(s,x) for r <= s
  const double horizon = std::max(hit.t0 * (1.0 + 1e-3) + 1e-12, 1e-9);
  Trajectory traj = integrate_characteristic(x, w, phi, horizon, steps);
  ArrayXd integrand(quad_nodes + 1);
  for (int j = 0; j <= quad_nodes; ++j) {
    const double r = s * j / quad_nodes;
    double g;
    if (r == 0.0) {
      g = x;
    } else {
      double t_hit, st[4];
      if (!hit_on_trajectory(traj, r, w, phi, &t_hit, st))
        throw NoHitDetected("intermediate hit missing at r = " + std::to_string(r));
      g = st[0];
    }
    const double c = w.d1(g) + r * phi.d1(g);
    integrand[j] = 1.0 / (1.0 + c * c);
  }
  double integral = 0.0;
  const double hr = s / quad_nodes;
  for (int j = 0; j + 2 <= quad_nodes; j += 2)
    integral += hr / 3.0 * (integrand[j] + 4.0 * integrand[j + 1] + integrand[j + 2]);
  return std::abs(hit.t0 - integral);
}

double T0_closed_form(double s, double x, const PeriodicProfile& w,
                      const BumpPerturbation& phi) {
  const double w1 = w.d1(x), p1 = phi.d1(x);
  if (std::abs(p1) < kZeroTol) return s / (1.0 + w1 * w1);
  return (std::atan(w1 + s * p1) - std::atan(w1)) / p1;
}

double partial_s_g_closed(double s, double r, const PeriodicProfile& w,
                          const BumpPerturbation& phi) {
  const double p = phi.value(r);
  if (std::abs(p) < kZeroTol) return 0.0;
  const double c = w.d1(r) + s * phi.d1(r);
  return -p * c / (1.0 + c * c);
}

double partial_x_g_at_zero(double s, double x0, const PeriodicProfile& w,
                           const BumpPerturbation& phi) {
  if (std::abs(phi.value(x0)) > 1e-12)
    throw NotAZero("phi(x0) != 0 at x0 = " + std::to_string(x0));
  const double w1 = w.d1(x0), c = w1 + s * phi.d1(x0);
  return std::sqrt(1.0 + w1 * w1) / std::sqrt(1.0 + c * c);
}

double tangential_residual(const FlowMaps& maps, const PeriodicProfile& w,
                           const BumpPerturbation& phi) {
  double worst = 0.0;
  for (int i = 0; i < maps.x.size(); ++i) {
    const double g = maps.g[i];
    const double W1g = w.d1(g) + maps.s * phi.d1(g);
    const double dxh = W1g * maps.dgdx[i];
    const double dsh = W1g * maps.dgds[i] + phi.value(g);
    worst = std::max(worst,
                     std::abs(maps.dgdx[i] * maps.dgds[i] + dxh * dsh));
  }
  return worst;
}

BoundaryDensity normal_velocity(const FlowMaps& maps) {
  return BoundaryDensity(maps.vel_nu, true);
}

BoundaryDensity acceleration_normal(const FlowMaps& maps) {
  return BoundaryDensity(maps.acc_nu, true);
}

double conservation_residual(const Trajectory& traj, const PeriodicProfile& w,
                             const BumpPerturbation& phi) {
  const Rhs rhs{w, phi};
  const int n = static_cast<int>(traj.states.size()) - 1;
  const double h = traj.dt();
  ArrayXd integrand(n + 1), target(n + 1);
  for (int k = 0; k <= n; ++k) {
    const auto& st = traj.states[k];
    const double p = phi.value(st.xi);
    if (std::abs(p) < 1e-13)
      throw UndefinedAtZero("phi vanishes along the trajectory");
    double y[4] = {st.xi, st.eta, st.dxi_dx, st.deta_dx};
    double f[4];
    rhs(y, f);
    integrand[k] = (f[0] * f[0] + f[1] * f[1]) / (p * p);
    target[k] = (st.eta - w.value(st.xi)) / p;
  }
  double acc = 0.0, worst = std::abs(target[0]);
  for (int k = 0; k + 2 <= n; k += 2) {
    acc += h / 3.0 * (integrand[k] + 4.0 * integrand[k + 1] + integrand[k + 2]);
    worst = std::max(worst, std::abs(acc - (target[k + 2] - target[0])));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Diffeomorphism family
// ---------------------------------------------------------------------------

FlowBox default_flow_box(const PeriodicProfile& w) {
  FlowBox box;
  box.L = 0.4 * w.min_value();
  box.M = w.max_value() + 0.5;
  box.delta0 = 0.5 * std::min(1.0, box.L);
  return box;
}

DiffeoFamily::DiffeoFamily(PeriodicProfile w, BumpPerturbation phi, FlowBox box,
                           int steps)
    : w_(std::move(w)), phi_(std::move(phi)), box_(box), steps_(steps) {}

double DiffeoFamily::cutoff(double y) const {
  const double L = box_.L, M2 = box_.M + 2.0, d0 = box_.delta0;
  if (y <= L || y >= M2) return 0.0;
  if (y < L + d0) return smoothstep_quintic((y - L) / d0);
  if (y > M2 - d0) return smoothstep_quintic((M2 - y) / d0);
  return 1.0;
}

double DiffeoFamily::cutoff_d1(double y) const {
  const double L = box_.L, M2 = box_.M + 2.0, d0 = box_.delta0;
  if (y <= L || y >= M2) return 0.0;
  if (y < L + d0) return smoothstep_quintic_d1((y - L) / d0) / d0;
  if (y > M2 - d0) return -smoothstep_quintic_d1((M2 - y) / d0) / d0;
  return 0.0;
}

bool DiffeoFamily::in_support(double x, double y) const {
  return phi_.a() < x && x < phi_.b() && box_.L < y && y < box_.M + 2.0;
}

Vector2d DiffeoFamily::map(double s, double x, double y) const {
  if (!in_support(x, y) || s == 0.0) return Vector2d(x, y);
  const double lam = cutoff(y);
  if (lam == 0.0) return Vector2d(x, y);
  const HitResult hit = hitting_time(s, x, w_, phi_, steps_);
  const double px = hit.g, py = hit.h + y - w_.value(x);
  return Vector2d(x + lam * (px - x), y + lam * (py - y));
}

Matrix2d DiffeoFamily::jacobian(double s, double x, double y) const {
  Matrix2d J = Matrix2d::Identity();
  if (!in_support(x, y) || s == 0.0) return J;
  const double lam = cutoff(y), dlam = cutoff_d1(y);
  if (lam == 0.0 && dlam == 0.0) return J;
  const HitResult hit = hitting_time(s, x, w_, phi_, steps_);
  double dgdx;
  if (std::abs(phi_.value(x)) < kZeroTol) {
    dgdx = partial_x_g_at_zero(s, x, w_, phi_);
  } else {
    const double W1g = w_.d1(hit.g) + s * phi_.d1(hit.g);
    dgdx = (hit.dxi_dx + W1g * hit.deta_dx) / (1.0 + W1g * W1g);
  }
  const double W1g = w_.d1(hit.g) + s * phi_.d1(hit.g);
  const double dxh = W1g * dgdx;
  const double gx = hit.g - x;
  const double hy = hit.h - w_.value(x);
  J(0, 0) = 1.0 + lam * (dgdx - 1.0);
  J(0, 1) = gx * dlam;
  J(1, 0) = lam * (dxh - w_.d1(x));
  J(1, 1) = 1.0 + hy * dlam;
  return J;
}

DiffeoFamily build_diffeo(const PeriodicProfile& w, const BumpPerturbation& phi,
                          double s, FlowBox box, int steps) {
  if (!(box.delta0 > 0.0 && box.delta0 < std::min(1.0, box.L)))
    throw CutoffInfeasible("delta0 must satisfy 0 < delta0 < min(1, L)");
  if (!(box.L > 0.0 && 2.0 * box.L < w.min_value()))
    throw CutoffInfeasible("L must satisfy 0 < 2L < min w");
  if (!(box.M > w.max_value()))
    throw CutoffInfeasible("M must exceed max w");
  DiffeoFamily family(w, phi, box, steps);
  double worst = 0.0;
  const int nx = 33, ny = 17;
  for (int i = 0; i <= nx; ++i) {
    const double x = phi.a() + (phi.b() - phi.a()) * i / nx;
    for (int j = 0; j <= ny; ++j) {
      const double y = box.L + (box.M + 2.0 - box.L) * j / ny;
      const Matrix2d J = family.jacobian(s, x, y);
      worst = std::max(worst, (J - Matrix2d::Identity()).norm());
    }
  }
  if (worst >= 1.0)
    throw NotInjective("|D Phi_s - I| = " + std::to_string(worst) +
                       " >= 1 on the test grid");
  return family;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

DerivativeBoundsReport derivative_bounds_check(const PeriodicProfile& w,
                                               const BumpPerturbation& phi0,
                                               const std::vector<double>& lambdas,
                                               int x_samples, int steps) {
  DerivativeBoundsReport rep;
  const double a = phi0.a(), b = phi0.b();
  const std::vector<double> s_samples = {0.25, 0.5, 0.75, 1.0};
  for (double lam : lambdas) {
    const BumpPerturbation phi = phi0.scaled(lam);
    DerivativeBoundsEntry e;
    e.lambda = lam;
    for (double s : s_samples) {
      for (int i = 0; i <= x_samples; ++i) {
        const double x = a + (b - a) * i / x_samples;
        const HitResult hit = hitting_time(s, x, w, phi, steps);
        double dgdx;
        if (std::abs(phi.value(x)) < kZeroTol) {
          dgdx = partial_x_g_at_zero(s, x, w, phi);
        } else {
          const double W1g = w.d1(hit.g) + s * phi.d1(hit.g);
          dgdx = (hit.dxi_dx + W1g * hit.deta_dx) / (1.0 + W1g * W1g);
        }
        const double W1g = w.d1(hit.g) + s * phi.d1(hit.g);
        e.sup_dgdx = std::max(e.sup_dgdx, std::abs(dgdx - 1.0));
        e.sup_dhdx = std::max(e.sup_dhdx, std::abs(W1g * dgdx - w.d1(x)));
        if (std::abs(phi.value(x)) >= kZeroTol && hit.t0 > 0.0) {
          Trajectory traj = integrate_characteristic(x, w, phi, hit.t0, steps);
          for (const auto& st : traj.states) {
            e.sup_dxi = std::max(e.sup_dxi, std::abs(st.dxi_dx - 1.0));
            e.sup_deta = std::max(e.sup_deta, std::abs(st.deta_dx - w.d1(x)));
            if (phi.value(st.xi) * phi.value(x) <= 0.0) rep.sign_preserved = false;
          }
        }
      }
    }
    rep.entries.push_back(e);
  }
  std::vector<double> lx, lg, lxi;
  for (const auto& e : rep.entries) {
    if (e.sup_dgdx > 0.0 && e.sup_dxi > 0.0) {
      lx.push_back(std::log(e.lambda));
      lg.push_back(std::log(e.sup_dgdx));
      lxi.push_back(std::log(e.sup_dxi));
    }
  }
  if (lx.size() >= 2) {
    rep.slope_dgdx = fitted_slope(lx, lg);
    rep.slope_dxi = fitted_slope(lx, lxi);
  }
  return rep;
}

AdmissibilityReport admissibility_report(const DiffeoFamily& family,
                                         const std::vector<double>& s_samples) {
  AdmissibilityReport rep;
  const auto& w = family.profile();
  const auto& phi = family.bump();
  const auto& box = family.box();
  const double a = phi.a(), b = phi.b();

  // (iii) identity at s = 0
  std::mt19937_64 rng(0);
  std::uniform_real_distribution<double> ux(a, b), uy(box.L, box.M + 2.0);
  for (int k = 0; k < 100; ++k) {
    const double x = ux(rng), y = uy(rng);
    const Vector2d p = family.map(0.0, x, y);
    rep.identity_defect_at_zero = std::max(
        rep.identity_defect_at_zero, std::max(std::abs(p[0] - x), std::abs(p[1] - y)));
  }
  if (rep.identity_defect_at_zero > 1e-12)
    rep.violations.push_back("Phi_0 differs from the identity");

  for (double s : s_samples) {
    // (ii) injectivity margin
    const int nx = 25, ny = 13;
    for (int i = 0; i <= nx; ++i)
      for (int j = 0; j <= ny; ++j) {
        const double x = a + (b - a) * i / nx;
        const double y = box.L + (box.M + 2.0 - box.L) * j / ny;
        const Matrix2d J = family.jacobian(s, x, y);
        rep.max_dphi_minus_identity = std::max(
            rep.max_dphi_minus_identity, (J - Matrix2d::Identity()).norm());
      }

    // (iv) identity outside the support box U
    for (double x : {a - 0.05, b + 0.05, -0.999, 0.999}) {
      for (double y : {box.L * 0.5, box.M + 2.1}) {
        if (x > -1.0 && x < 1.0) {
          const Vector2d p = family.map(s, x, y);
          rep.support_defect = std::max(
              rep.support_defect, std::max(std::abs(p[0] - x), std::abs(p[1] - y)));
        }
      }
    }

    // (v) image identity Phi_s(Gamma) = graph(w + s phi)
    for (int i = 0; i <= 64; ++i) {
      const double x = a + (b - a) * i / 64;
      const Vector2d p = family.map(s, x, w.value(x));
      const double defect = std::abs(p[1] - w.value(p[0]) - s * phi.value(p[0]));
      rep.image_defect = std::max(rep.image_defect, defect);
    }
  }
  if (rep.max_dphi_minus_identity >= 1.0)
    rep.violations.push_back("NotInjective: |D Phi_s - I| >= 1");
  if (rep.support_defect > 0.0)
    rep.violations.push_back("supp(Phi_s - Id) exceeds U");
  if (rep.image_defect > 1e-8)
    rep.violations.push_back("Phi_s(Gamma) misses the graph of w + s phi");

  // (i) C^2 smoothness proxy: second differences at two step sizes
  auto probe_second = [&](double hstep, double* bound) {
    double worst = 0.0;
    for (double s : s_samples) {
      if (s - 2.0 * hstep < 0.0 || s + 2.0 * hstep > 1.0) continue;
      for (int i = 1; i < 12; ++i) {
        const double x = a + (b - a) * i / 12.0;
        const double y = 0.5 * (box.L + box.M);
        for (int comp = 0; comp < 2; ++comp) {
          const double fss =
              (family.map(s + hstep, x, y)[comp] - 2.0 * family.map(s, x, y)[comp] +
               family.map(s - hstep, x, y)[comp]) / (hstep * hstep);
          const double fxx =
              (family.map(s, x + hstep, y)[comp] - 2.0 * family.map(s, x, y)[comp] +
               family.map(s, x - hstep, y)[comp]) / (hstep * hstep);
          const double fyy =
              (family.map(s, x, y + hstep)[comp] - 2.0 * family.map(s, x, y)[comp] +
               family.map(s, x, y - hstep)[comp]) / (hstep * hstep);
          worst = std::max({worst, std::abs(fss), std::abs(fxx), std::abs(fyy)});
        }
      }
    }
    *bound = worst;
  };
  double b1 = 0.0, b2 = 0.0;
  probe_second(1e-3, &b1);
  probe_second(5e-4, &b2);
  rep.second_derivative_bound = std::max(b1, b2);
  rep.second_derivative_drift = std::abs(b2 - b1) / (1.0 + std::abs(b2));
  if (!(rep.second_derivative_bound < 1e5) || rep.second_derivative_drift > 0.5)
    rep.violations.push_back("C^2 proxy failed: second differences not settled");

  return rep;
}

}  // namespace fbstab

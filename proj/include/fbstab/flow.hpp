#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fbstab/geometry.hpp"

namespace fbstab {

using Eigen::Matrix2d;
using Eigen::Vector2d;

// ---------------------------------------------------------------------------
// Characteristic system
// ---------------------------------------------------------------------------

/// One node of a characteristic trajectory, with the co-integrated
/// variational pair (d xi/d x, d eta/d x).
struct CharacteristicState {
  double t = 0.0;
  double xi = 0.0, eta = 0.0;
  double dxi_dx = 1.0, deta_dx = 0.0;
};

struct Trajectory {
  double seed = 0.0;
  std::vector<CharacteristicState> states;  // steps+1 nodes, uniform in t
  double dt() const {
    return states.size() > 1 ? states[1].t - states[0].t : 0.0;
  }
};

/// Fixed-step RK4 integration of the characteristic system
///   xi'  = -w'(xi) phi(xi) - (eta - w(xi)) phi'(xi),   eta' = phi(xi)
/// seeded at (x, w(x)), together with its x-derivative system.
Trajectory integrate_characteristic(double x, const PeriodicProfile& w,
                                    const BumpPerturbation& phi, double t_end,
                                    int steps);

// ---------------------------------------------------------------------------
// Hitting times and the maps g, h
// ---------------------------------------------------------------------------

enum class HitStatus { Immediate, Detected, ClosedFormLimit };

struct HitResult {
  double t0 = 0.0;
  double g = 0.0, h = 0.0;      // hit point (xi, eta)(t0)
  double dxi_dx = 1.0, deta_dx = 0.0;
  HitStatus status = HitStatus::Immediate;
  double residual = 0.0;        // |eta - w(xi) - s phi(xi)| at t0
};

/// First time the trajectory seeded at (x,w(x)) meets the graph of w + s phi.
/// Returns t0 = 0 for s = 0 or phi(x) = 0, t0 = s at interior apex points,
/// and otherwise refines a detected sign change by bisection. Throws
/// NoHitDetected if no crossing occurs before the safety horizon.
HitResult hitting_time(double s, double x, const PeriodicProfile& w,
                       const BumpPerturbation& phi, int steps = 256);

/// Sampled g(s,.), h(s,.), t0(s,.), derivative arrays and the normal
/// velocity/acceleration factors of the flow, for one value of s.
struct FlowMaps {
  double s = 0.0;
  ArrayXd x;       // seed grid
  ArrayXd g, h, t0;
  ArrayXd dgdx;    // variational route, with the limit formula at zeros of phi
  ArrayXd dgds;    // closed form
  ArrayXd vel_nu;  // (X_s . nu_s) o Phi_s = phi(g)/sqrt(1+[w'(g)+s phi'(g)]^2)
  ArrayXd acc_nu;  // Phi_s'' . (D Phi_s)^{-T} nu, seed normalization
};

FlowMaps flow_maps(double s, const ArrayXd& x_grid, const PeriodicProfile& w,
                   const BumpPerturbation& phi, int steps = 256);

// ---------------------------------------------------------------------------
// Closed forms and identity residuals
// ---------------------------------------------------------------------------

/// | t0 - int_0^s dr / (1 + [w'(g(r,x)) + r phi'(g(r,x))]^2) | with the
/// integral evaluated by composite Simpson over independent event detections.
double t0_implicit_residual(double s, double x, const HitResult& hit,
                            const PeriodicProfile& w,
                            const BumpPerturbation& phi, int quad_nodes = 256,
                            int steps = 256);

/// One-sided limit of t0 at a zero of phi:
/// [arctan(w'+s phi') - arctan(w')]/phi' (or s/(1+w'^2) if phi'(x)=0).
double T0_closed_form(double s, double x, const PeriodicProfile& w,
                      const BumpPerturbation& phi);

/// d g/d s expressed through the image point r = g(s,x):
/// -phi(r)[w'(r)+s phi'(r)] / (1 + [w'(r)+s phi'(r)]^2); zero when phi(r)=0.
double partial_s_g_closed(double s, double r, const PeriodicProfile& w,
                          const BumpPerturbation& phi);

/// d g/d x at a zero x0 of phi: sqrt(1+w'^2)/sqrt(1+(w'+s phi')^2).
/// Throws NotAZero when phi(x0) != 0.
double partial_x_g_at_zero(double s, double x0, const PeriodicProfile& w,
                           const BumpPerturbation& phi);

/// max over the grid of |dg/dx dg/ds + dh/dx dh/ds| with the h-derivatives
/// from the chain rules dh/dx = W' (g) dg/dx, dh/ds = W'(g) dg/ds + phi(g).
double tangential_residual(const FlowMaps& maps, const PeriodicProfile& w,
                           const BumpPerturbation& phi);

BoundaryDensity normal_velocity(const FlowMaps& maps);
BoundaryDensity acceleration_normal(const FlowMaps& maps);

/// max over stored even nodes of the defect in
///   int_0^t [(xi')^2 + (eta')^2]/phi^2(xi) dr = (eta - w(xi))/phi(xi).
/// Throws UndefinedAtZero if phi vanishes along the trajectory.
double conservation_residual(const Trajectory& traj, const PeriodicProfile& w,
                             const BumpPerturbation& phi);

// ---------------------------------------------------------------------------
// The diffeomorphism family
// ---------------------------------------------------------------------------

struct FlowBox {
  double L = 0.0, M = 0.0, delta0 = 0.0;
};

/// L = 0.4 min w (so 2L < min w), M = max w + 0.5, delta0 = min(1,L)/2.
FlowBox default_flow_box(const PeriodicProfile& w);

/// Phi_s(x,y) = lambda(y) Psi_s(x,y) + (1-lambda(y)) (x,y) with
/// Psi_s(x,y) = (g(s,x), h(s,x) + y - w(x)) and a C^2 piecewise-quintic
/// cutoff lambda supported in (L, M+2), equal to 1 on [L+d0, M+2-d0].
class DiffeoFamily {
 public:
  DiffeoFamily(PeriodicProfile w, BumpPerturbation phi, FlowBox box,
               int steps = 256);

  Vector2d map(double s, double x, double y) const;
  Matrix2d jacobian(double s, double x, double y) const;

  double cutoff(double y) const;
  double cutoff_d1(double y) const;

  const FlowBox& box() const { return box_; }
  const PeriodicProfile& profile() const { return w_; }
  const BumpPerturbation& bump() const { return phi_; }
  bool in_support(double x, double y) const;

 private:
  PeriodicProfile w_;
  BumpPerturbation phi_;
  FlowBox box_;
  int steps_;
};

/// Validates the cutoff bounds and the injectivity margin |D Phi_s - I| < 1
/// on a test grid at the requested s. Throws CutoffInfeasible / NotInjective.
DiffeoFamily build_diffeo(const PeriodicProfile& w, const BumpPerturbation& phi,
                          double s, FlowBox box, int steps = 256);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct DerivativeBoundsEntry {
  double lambda = 0.0;
  double sup_dgdx = 0.0;   // sup |dg/dx - 1|
  double sup_dhdx = 0.0;   // sup |dh/dx - w'(x)|
  double sup_dxi = 0.0;    // sup |dxi/dx - 1| along trajectories
  double sup_deta = 0.0;   // sup |deta/dx - w'(x)|
};

struct DerivativeBoundsReport {
  std::vector<DerivativeBoundsEntry> entries;
  double slope_dgdx = 0.0;  // fitted log-log slope, expected ~1
  double slope_dxi = 0.0;
  bool sign_preserved = true;
};

DerivativeBoundsReport derivative_bounds_check(const PeriodicProfile& w,
                                               const BumpPerturbation& phi0,
                                               const std::vector<double>& lambdas,
                                               int x_samples = 161,
                                               int steps = 256);

struct AdmissibilityReport {
  double second_derivative_bound = 0.0;
  double second_derivative_drift = 0.0;
  double max_dphi_minus_identity = 0.0;
  double identity_defect_at_zero = 0.0;
  double support_defect = 0.0;
  double image_defect = 0.0;
  std::vector<std::string> violations;
  bool admissible() const { return violations.empty(); }
};

AdmissibilityReport admissibility_report(const DiffeoFamily& family,
                                         const std::vector<double>& s_samples);

}  // namespace fbstab

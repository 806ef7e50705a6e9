#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <variant>

#include "fbstab/errors.hpp"

namespace fbstab {

using Eigen::ArrayXd;

/// Uniform grid of n+1 abscissas covering [-1,1]; first and last wrap.
ArrayXd uniform_grid(int n);

/// Periodic trapezoidal rule on samples over [-1,1] (first sample == last).
double trapezoid_periodic(const ArrayXd& values, double dx);

/// Curvature of the graph {y = W(x)} in the convention  d_tau(nu) = kappa tau,
/// with nu = (-W',1)/sqrt(1+W'^2) the upward normal.
inline double graph_curvature(double w1, double w2) {
  const double r2 = 1.0 + w1 * w1;
  return -w2 / (r2 * std::sqrt(r2));
}

// ---------------------------------------------------------------------------
// PeriodicProfile
// ---------------------------------------------------------------------------

struct ConstantProfileSpec { double value = 1.0; };
/// w(x) = mean + sum_k cos_coeffs[k-1] cos(k pi x) + sin_coeffs[k-1] sin(k pi x)
struct FourierProfileSpec { double mean = 1.0; ArrayXd cos_coeffs, sin_coeffs; };
/// Monomial polynomial evaluated on x wrapped into [-1,1); the periodic
/// extension must be C^3 across the seam.
struct PolyProfileSpec { ArrayXd coeffs; };
/// Uniform samples on [-1,1) (x_i = -1 + 2i/n), interpolated trigonometrically.
struct SampleProfileSpec { ArrayXd values; };

using ProfileSpec = std::variant<ConstantProfileSpec, FourierProfileSpec,
                                 PolyProfileSpec, SampleProfileSpec>;

/// The free-boundary graph function w, positive and C^3-periodic with period 2.
class PeriodicProfile {
 public:
  PeriodicProfile();  // w == 1

  double value(double x) const;
  double d1(double x) const;
  double d2(double x) const;
  double d3(double x) const;

  double min_value() const { return min_value_; }
  double max_value() const { return max_value_; }

  /// Arclength of one period of Gamma.
  double length() const { return length_; }
  /// sigma(x) = int_{-1}^{x} sqrt(1 + w'^2), for x in [-1,1].
  double arclength(double x) const;

  bool is_constant() const;

  friend PeriodicProfile make_profile(const ProfileSpec& spec);

 private:
  void finalize();

  bool trig_ = true;
  double mean_ = 1.0;
  ArrayXd cosc_, sinc_;   // trig representation
  ArrayXd poly_;          // monomial representation (wrapped)
  double min_value_ = 1.0, max_value_ = 1.0, length_ = 2.0;
  ArrayXd sigma_table_;   // cumulative arclength on a fine uniform grid
};

/// Validates positivity and C^3 periodicity of the described profile.
/// Throws NonPositiveProfile or NotPeriodic.
PeriodicProfile make_profile(const ProfileSpec& spec);

// ---------------------------------------------------------------------------
// BumpPerturbation
// ---------------------------------------------------------------------------

/// Compactly supported polynomial bump phi on [a,b] subset (-1,1) with
/// phi = phi' = phi'' = phi''' = 0 at both endpoints; identically 0 outside.
class BumpPerturbation {
 public:
  BumpPerturbation();  // phi == 0 on [-0.5, 0.5]

  double a() const { return a_; }
  double b() const { return b_; }
  const ArrayXd& coeffs() const { return coeffs_; }

  double value(double x) const { return eval(x, 0); }
  double d1(double x) const { return eval(x, 1); }
  double d2(double x) const { return eval(x, 2); }
  double d3(double x) const { return eval(x, 3); }

  bool is_zero() const;

  /// max|phi| + max|phi'| + max|phi''| on a sample grid.
  double c2_norm(int samples = 2048) const;
  /// c2_norm plus the sampled Hoelder quotient of phi''. Used for smallness
  /// thresholds only, never inside identities.
  double c2alpha_surrogate(double alpha = 0.5, int samples = 512) const;

  BumpPerturbation scaled(double factor) const;

  friend BumpPerturbation make_bump(const ArrayXd& coeffs, double a, double b);

 private:
  double eval(double x, int derivative) const;
  double a_ = -0.5, b_ = 0.5;
  ArrayXd coeffs_;  // monomial, ascending degree
};

/// Validates the eight endpoint conditions; throws EndpointConditionViolated
/// with the first failing derivative index.
BumpPerturbation make_bump(const ArrayXd& coeffs, double a, double b);

/// (x-a)^4 (b-x)^4 * factor(x), which satisfies the endpoint conditions by
/// construction; factor is a monomial coefficient list.
BumpPerturbation make_window_bump(const ArrayXd& factor, double a, double b);

// ---------------------------------------------------------------------------
// CurveFrame
// ---------------------------------------------------------------------------

/// Unit tangent/normal and curvature sampled along the graph of w + s phi.
struct CurveFrame {
  ArrayXd x;
  ArrayXd tau_x, tau_y;  // tangent (1,W')/sqrt(1+W'^2)
  ArrayXd nu_x, nu_y;    // upward normal (-W',1)/sqrt(1+W'^2)
  ArrayXd kappa;         // d_tau(nu) = kappa tau
};

CurveFrame frame(const PeriodicProfile& profile, const BumpPerturbation* bump,
                 double s, const ArrayXd& x_grid);

// ---------------------------------------------------------------------------
// BoundaryDensity and the boundary metrics
// ---------------------------------------------------------------------------

/// Samples of a function psi(x, w(x)) on the uniform grid over [-1,1]
/// (n+1 values, first == last).
struct BoundaryDensity {
  ArrayXd values;
  bool compact_support = false;

  BoundaryDensity() = default;
  explicit BoundaryDensity(ArrayXd v, bool compact = false)
      : values(std::move(v)), compact_support(compact) {}

  int intervals() const { return static_cast<int>(values.size()) - 1; }
  static BoundaryDensity constant(double c, int n);
  static BoundaryDensity sample(const std::function<double(double)>& f, int n,
                                bool compact = false);
};

/// L^2(Gamma) norm: sqrt of the arclength-weighted trapezoidal quadrature of psi^2.
double l2_norm_gamma(const BoundaryDensity& psi, const PeriodicProfile& curve);

/// Spectral H^{1/2}(Gamma) norm: (sum_k (1+|kappa_k|) |c_k|^2)^{1/2} where c_k
/// are the L^2(Gamma)-orthonormal Fourier coefficients of psi in the arclength
/// parameter and kappa_k = 2 pi k / |Gamma|.
double h_half_norm(const BoundaryDensity& psi, const PeriodicProfile& curve);

/// L^2(Gamma)-orthonormal real Fourier mode in normalized arclength:
/// index 0 -> 1/sqrt|Gamma|; index 2k-1 -> sqrt(2/|Gamma|) cos(2 pi k sigma/|Gamma|);
/// index 2k -> the matching sine. Sampled on the uniform x-grid with n intervals.
BoundaryDensity boundary_mode(const PeriodicProfile& curve, int index, int n);

/// H^{1/2} weight of boundary_mode(index): 1 + 2 pi k / |Gamma|.
double h_half_weight(const PeriodicProfile& curve, int index);

}  // namespace fbstab

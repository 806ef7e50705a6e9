#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <functional>
#include <memory>
#include <optional>

#include "fbstab/geometry.hpp"

namespace fbstab {

using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// QField
// ---------------------------------------------------------------------------

/// The weight Q(x,y) with the gradient of Q^2 and bounds.
class QField {
 public:
  enum class Kind { Constant, WaterWave, Custom };

  static QField constant(double value);
  /// Q(x,y) = sqrt((q - 2 g y)_+)
  static QField water_wave(double q, double g);
  static QField custom(std::function<double(double, double)> q2,
                       std::function<Vector2d(double, double)> grad_q2,
                       double q_max);

  double q(double x, double y) const { return std::sqrt(std::max(q2(x, y), 0.0)); }
  double q2(double x, double y) const { return q2_(x, y); }
  Vector2d grad_q2(double x, double y) const { return grad_q2_(x, y); }

  Kind kind() const { return kind_; }
  double q_max() const { return q_max_; }
  /// Smallest Q over the band {0 <= y <= y_max}.
  double q_min_below(double y_max) const;
  double ww_q() const { return ww_q_; }
  double ww_g() const { return ww_g_; }

 private:
  QField() = default;
  Kind kind_ = Kind::Constant;
  double ww_q_ = 0.0, ww_g_ = 0.0, q_max_ = 0.0;
  std::function<double(double, double)> q2_;
  std::function<Vector2d(double, double)> grad_q2_;
};

// ---------------------------------------------------------------------------
// Domains and fields
// ---------------------------------------------------------------------------

/// Curvilinear channel {b(x) < y < T(x)} over [x0,x1], mapped onto the unit
/// square by y = b(x) + t (T(x)-b(x)).
struct Channel {
  std::function<double(double)> bottom, bottom_d1, top, top_d1;
  double x0 = -1.0, x1 = 1.0;
  int nx = 0, ny = 0;
  bool periodic = true;  // lateral identification; otherwise zero Dirichlet walls
};

/// Graph strip {0 < y < w(x) + s phi(x)}, laterally periodic.
class StripDomain {
 public:
  StripDomain(PeriodicProfile w, const BumpPerturbation* bump, double s,
              int nx, int ny);

  double top(double x) const;
  double top_d1(double x) const;
  double top_d2(double x) const;

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double s() const { return s_; }
  const PeriodicProfile& profile() const { return w_; }
  const BumpPerturbation* bump() const { return has_bump_ ? &phi_ : nullptr; }

  Channel channel() const;

 private:
  PeriodicProfile w_;
  BumpPerturbation phi_;
  bool has_bump_ = false;
  double s_ = 0.0;
  int nx_, ny_;
};

/// Nodal values on the mapped grid; row j holds the level t = j/ny.
struct GridField {
  MatrixXd u;      // (ny+1) x ncols, ncols = nx (periodic) or nx+1
  bool periodic = true;
  int nx = 0, ny = 0;

  double at(int i, int j) const {
    return u(j, periodic ? ((i % nx + nx) % nx) : i);
  }
  ArrayXd top_trace() const;     // nx+1 values (wrapped)
  ArrayXd bottom_trace() const;  // nx+1 values (wrapped)
};

struct EnergyBreakdown {
  double dirichlet = 0.0;  // int |grad v|^2
  double volume = 0.0;     // int_{v>0} Q^2
  double total = 0.0;
};

// ---------------------------------------------------------------------------
// Solver
// ---------------------------------------------------------------------------

/// Divergence-form Q1 discretization of the Laplacian in mapped coordinates;
/// one factorization serves any number of boundary data.
class ChannelSolver {
 public:
  explicit ChannelSolver(Channel ch);

  /// Dirichlet traces sampled on the x-nodes (nx+1 values each).
  GridField solve(const ArrayXd& bottom_trace, const ArrayXd& top_trace) const;

  /// int grad u . grad v over the channel (assembly quadrature).
  double bilinear(const GridField& a, const GridField& b) const;
  double dirichlet_energy(const GridField& a) const { return bilinear(a, a); }

  /// Nodal coefficient vector of a field (solver ordering).
  VectorXd nodal_vector(const GridField& a) const;
  const Eigen::SparseMatrix<double>& stiffness() const { return K_; }

  const Channel& channel() const { return ch_; }
  double x_of(int i) const { return ch_.x0 + i * dx_; }
  double dx() const { return dx_; }
  double dt() const { return dt_; }
  int ncols() const { return ncols_; }

 private:
  int node(int i, int j) const { return j * ncols_ + (periodic_ ? ((i % ch_.nx + ch_.nx) % ch_.nx) : i); }
  bool is_boundary(int i, int j) const;

  Channel ch_;
  bool periodic_;
  int ncols_, nnodes_;
  double dx_, dt_;
  Eigen::SparseMatrix<double> K_;  // full nodal stiffness
  Eigen::SparseMatrix<double> Kii_;
  std::vector<int> interior_of_node_;  // -1 on Dirichlet nodes
  std::vector<int> node_of_interior_;
  std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

GridField solve_harmonic(const StripDomain& dom, const BoundaryDensity& bottom,
                         const BoundaryDensity& top);

/// Outward normal derivative on Gamma_s via a second-order one-sided stencil
/// in t composed with the inverse metric of the mapping.
BoundaryDensity normal_flux(const GridField& field, const StripDomain& dom);

/// Downward flux integral along {y=0} (for divergence-theorem checks).
double bottom_flux_integral(const GridField& field, const StripDomain& dom);

EnergyBreakdown energy(const GridField& field, const QField& Q,
                       const StripDomain& dom);

/// Harmonic field with trace Q psi on Gamma_s and 0 at y=0.
GridField solve_linearized(const BoundaryDensity& psi, const QField& Q,
                           const StripDomain& dom);

/// Bilinear interpolation of the field and of its physical gradient at a
/// point (x,y) of the strip (t = y / W(x) clamped to the mapped square).
double value_at(const GridField& field, const StripDomain& dom, double x, double y);
Vector2d gradient_at(const GridField& field, const StripDomain& dom, double x,
                     double y);

struct CriticalityReport {
  double residual = 0.0;        // max |(d_nu u)^2 - Q^2| on Gamma
  BoundaryDensity flux;         // signed d_nu u
  bool flux_negative = false;   // Hopf: d_nu u < 0 everywhere
};
CriticalityReport check_criticality(const GridField& field, const QField& Q,
                                    const StripDomain& dom);

struct EulerLagrangeReport {
  double interior_residual = 0.0;       // max |Delta u| at interior nodes
  double boundary_value_residual = 0.0; // max |u| on Gamma
  double flux_residual = 0.0;           // max ||grad u| - Q| on Gamma
};
EulerLagrangeReport check_euler_lagrange(const GridField& field, const QField& Q,
                                         const StripDomain& dom);

}  // namespace fbstab

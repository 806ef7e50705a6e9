#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "fbstab/scenario.hpp"

namespace fbstab {

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Value of the second-variation quadratic form at a critical base state:
///   bulk = int 2 |grad u_psi|^2,   boundary = int (d_nu Q^2 + 2 kappa Q^2) psi^2.
struct QuadraticFormReport {
  double bulk = 0.0;
  double boundary = 0.0;
  double total = 0.0;
  std::string psi_label;
};

struct CoercivityEstimate {
  int modes = 0;              // cutoff K; the trial space has 2K+1 modes
  Eigen::MatrixXd form;       // symmetric quadratic-form matrix
  Eigen::VectorXd gram;       // diagonal H^{1/2} Gram (positive definite)
  // smallest generalized eigenvalue over the trial space: a Rayleigh-quotient
  // minimum, hence an upper bound for the true infimum
  double eigenvalue = 0.0;
  double asymmetry = 0.0;     // relative asymmetry before symmetrization
  double max_offdiag = 0.0;   // relative off-diagonal magnitude of `form`
  std::optional<double> epsilon;  // tubular radius when applicable
  std::optional<double> mu;       // mu_epsilon when computed alongside
};

struct VariationReport {
  double s = 0.0;
  double first = 0.0;        // (1var)
  double second = 0.0;       // (2var) = bulk + boundary_term + defect_term
  double bulk = 0.0;         // int 2 |grad du_s|^2
  double boundary_term = 0.0;  // int (d_nu Q^2 + 2 kappa_s (d_nu u_s)^2) (X.nu)^2
  double defect_term = 0.0;    // int (Q^2 - |grad u_s|^2)(Z.nu + kappa_s (X.nu)^2)
};

struct TraceEquivalenceReport {
  std::vector<double> energies;   // minimal Dirichlet energies on A = U cap {u>0}
  std::vector<double> h_half_sq;  // H^{1/2}(dA) norms squared of the composite trace
  std::vector<double> ratios;
  double ratio_min = 0.0, ratio_max = 0.0;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Criticality residual max |(d_nu u)^2 - Q^2| of the scenario's base state.
double criticality_residual(const Scenario& sc);

/// Throws NotCritical unless the base residual sits at the discretization
/// floor (absolute tolerance, or a factor-4 drop from the half grid within 10x).
void require_critical(const Scenario& sc);

/// Quadrature of (Q^2 - |grad u_s|^2) (X_s . nu_s) over Gamma_s.
double first_variation(const GridField& field, const QField& Q,
                       const StripDomain& dom, const BoundaryDensity& velocity);

QuadraticFormReport second_variation_form(const BoundaryDensity& psi,
                                          const Scenario& sc);

/// All three integrals of the second variation along the constructed flow;
/// the tangential contribution vanishes by construction.
VariationReport second_variation_along_flow(double s, const Scenario& sc,
                                            const FlowMaps& maps);

CoercivityEstimate coercivity_constant(const Scenario& sc, int K);

/// Minimal tubular Dirichlet energy over the K-mode space under the
/// L^2(Gamma) normalization; diverges as epsilon -> 0.
double mu_epsilon(const Scenario& sc, double epsilon, int K);

CoercivityEstimate tubular_coercivity(const Scenario& sc, double epsilon, int K);

TraceEquivalenceReport trace_equivalence_check(
    const Scenario& sc, const std::vector<BoundaryDensity>& psis);

}  // namespace fbstab

#pragma once

#include <cstdint>
#include <vector>

#include "fbstab/scenario.hpp"
#include "fbstab/variation.hpp"

namespace fbstab {

/// Energy, analytic and finite-difference second derivatives, and the
/// pressure-defect profile of F(u_s) along the flow.
struct FlowEnergyTrace {
  ArrayXd s;
  ArrayXd F;
  ArrayXd d2F_analytic;
  ArrayXd d2F_fd;      // central second differences; NaN where undefined
  ArrayXd defect_sup;  // sup_Gamma_s |Q^2 - |grad u_s|^2|
};

FlowEnergyTrace energy_along_flow(const Scenario& sc, const ArrayXd& s_grid);

struct FdCheckReport {
  double max_rel_dev = 0.0;  // Richardson-extrapolated FD vs analytic (2var)
  double first_diff0 = 0.0;  // (F_1 - F_0)/ds, the (1var) probe at s=0
  int richardson_points = 0;
};

/// Fills trace.d2F_fd and cross-checks it against the analytic column.
/// Throws TooFewSamples unless the trace has >= 5 uniform samples.
FdCheckReport fd_second_derivative_check(FlowEnergyTrace& trace);

struct MinimalityReport {
  std::vector<double> margins;  // F(u_1) - F(u) per random bump
  std::vector<double> norms;    // C^{2,alpha} surrogate norms used
  double tolerance = 0.0;       // C h^2, calibrated on the unperturbed domain
  double coercivity = 0.0;
  int strictly_positive = 0;
  bool all_within = true;
};

/// Random window bumps of both signs at a fixed surrogate norm; requires a
/// coercive base state (throws NotCoercive otherwise).
MinimalityReport minimality_experiment(const Scenario& sc, int bump_count,
                                       double target_norm, std::uint64_t seed);

/// Scenario with the Bernoulli weight Q = sqrt((q - 2 g y)_+). The bottom
/// datum makes the flat strip critical; it falls back to 1 when the weight
/// degenerates on the free boundary (energy evaluation stays legal there).
Scenario water_wave_scenario(double q, double g, const PeriodicProfile& profile,
                             int nx, int ny, int modes);

}  // namespace fbstab

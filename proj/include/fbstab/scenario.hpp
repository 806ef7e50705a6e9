#pragma once

#include <optional>
#include <utility>

#include "fbstab/elliptic.hpp"
#include "fbstab/flow.hpp"
#include "fbstab/geometry.hpp"

namespace fbstab {

/// A complete experiment description: base profile, bottom datum u*, weight Q,
/// bump perturbation, grids and flow constants.
struct Scenario {
  PeriodicProfile profile;
  BoundaryDensity bottom;  // u* on the nx-grid, strictly positive
  QField q_field = QField::constant(1.0);
  BumpPerturbation bump;
  int nx = 256, ny = 128;
  int modes = 32;
  FlowBox flow_box;  // zero-initialized entries resolve to defaults
  int flow_steps = 256;
  double alpha = 0.5;
  std::optional<std::pair<double, double>> water_wave;  // (q, g) when preset

  StripDomain domain(double s) const {
    return StripDomain(profile, bump.is_zero() ? nullptr : &bump, s, nx, ny);
  }
  FlowBox box() const {
    return flow_box.L > 0.0 ? flow_box : default_flow_box(profile);
  }
  /// Smallest Q over the band reachable by the flow, 0 <= y <= max(w + |phi|).
  double q_min() const {
    double reach = profile.max_value();
    if (!bump.is_zero()) {
      for (int i = 0; i <= 256; ++i) {
        const double x = bump.a() + (bump.b() - bump.a()) * i / 256.0;
        reach = std::max(reach, profile.value(x) + std::abs(bump.value(x)));
      }
    }
    return q_field.q_min_below(reach);
  }
};

/// Validates u* > 0 and the grid bounds.
Scenario make_scenario(PeriodicProfile profile, BoundaryDensity bottom,
                       QField q_field, BumpPerturbation bump, int nx, int ny,
                       int modes);

}  // namespace fbstab

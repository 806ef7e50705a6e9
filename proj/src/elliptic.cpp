#include "fbstab/elliptic.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <cmath>
#include <vector>

namespace fbstab {

namespace {

constexpr double kGaussOffset = 0.28867513459481287;  // 1/(2 sqrt 3)

// 2x2 Gauss points on the unit cell
const double kGp[2] = {0.5 - kGaussOffset, 0.5 + kGaussOffset};

// Mapped-Laplacian coefficient matrix at (x,t):
//   A = [[ d,        -(b'+t d') ],
//        [ -(b'+t d'), ((b'+t d')^2 + 1)/d ]]
inline void metric(const Channel& ch, double x, double t, double& a11,
                   double& a12, double& a22) {
  const double b1 = ch.bottom_d1(x);
  const double d = ch.top(x) - ch.bottom(x);
  const double d1 = ch.top_d1(x) - b1;
  const double c = b1 + t * d1;
  a11 = d;
  a12 = -c;
  a22 = (c * c + 1.0) / d;
}

}  // namespace

// ---------------------------------------------------------------------------
// QField
// ---------------------------------------------------------------------------

QField QField::constant(double value) {
  QField f;
  f.kind_ = Kind::Constant;
  f.q_max_ = value;
  const double v2 = value * value;
  f.q2_ = [v2](double, double) { return v2; };
  f.grad_q2_ = [](double, double) { return Vector2d::Zero().eval(); };
  return f;
}

QField QField::water_wave(double q, double g) {
  QField f;
  f.kind_ = Kind::WaterWave;
  f.ww_q_ = q;
  f.ww_g_ = g;
  f.q_max_ = std::sqrt(std::max(q, 0.0));
  f.q2_ = [q, g](double, double y) { return std::max(q - 2.0 * g * y, 0.0); };
  f.grad_q2_ = [q, g](double, double y) {
    return (q - 2.0 * g * y > 0.0) ? Vector2d(0.0, -2.0 * g) : Vector2d(0.0, 0.0);
  };
  return f;
}

QField QField::custom(std::function<double(double, double)> q2,
                      std::function<Vector2d(double, double)> grad_q2,
                      double q_max) {
  QField f;
  f.kind_ = Kind::Custom;
  f.q_max_ = q_max;
  f.q2_ = std::move(q2);
  f.grad_q2_ = std::move(grad_q2);
  return f;
}

double QField::q_min_below(double y_max) const {
  switch (kind_) {
    case Kind::Constant:
      return q_max_;
    case Kind::WaterWave:
      return std::sqrt(std::max(ww_q_ - 2.0 * ww_g_ * y_max, 0.0));
    case Kind::Custom: {
      double mn = q(0.0, 0.0);
      for (int i = 0; i <= 64; ++i)
        for (int j = 0; j <= 64; ++j)
          mn = std::min(mn, q(-1.0 + 2.0 * i / 64, y_max * j / 64));
      return mn;
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// StripDomain
// ---------------------------------------------------------------------------

StripDomain::StripDomain(PeriodicProfile w, const BumpPerturbation* bump,
                         double s, int nx, int ny)
    : w_(std::move(w)), s_(s), nx_(nx), ny_(ny) {
  if (nx < 8 || ny < 8)
    throw GridTooSmall("strip grid must have Nx >= 8 and Ny >= 8, got " +
                       std::to_string(nx) + "x" + std::to_string(ny));
  if (bump) {
    phi_ = *bump;
    has_bump_ = true;
  }
}

double StripDomain::top(double x) const {
  return w_.value(x) + (has_bump_ ? s_ * phi_.value(x) : 0.0);
}
double StripDomain::top_d1(double x) const {
  return w_.d1(x) + (has_bump_ ? s_ * phi_.d1(x) : 0.0);
}
double StripDomain::top_d2(double x) const {
  return w_.d2(x) + (has_bump_ ? s_ * phi_.d2(x) : 0.0);
}

Channel StripDomain::channel() const {
  Channel ch;
  ch.bottom = [](double) { return 0.0; };
  ch.bottom_d1 = [](double) { return 0.0; };
  ch.top = [this](double x) { return top(x); };
  ch.top_d1 = [this](double x) { return top_d1(x); };
  ch.x0 = -1.0;
  ch.x1 = 1.0;
  ch.nx = nx_;
  ch.ny = ny_;
  ch.periodic = true;
  return ch;
}

ArrayXd GridField::top_trace() const {
  ArrayXd v(nx + 1);
  for (int i = 0; i <= nx; ++i) v[i] = at(i, ny);
  return v;
}
ArrayXd GridField::bottom_trace() const {
  ArrayXd v(nx + 1);
  for (int i = 0; i <= nx; ++i) v[i] = at(i, 0);
  return v;
}

// ---------------------------------------------------------------------------
// ChannelSolver
// ---------------------------------------------------------------------------

bool ChannelSolver::is_boundary(int i, int j) const {
  if (j == 0 || j == ch_.ny) return true;
  if (!periodic_ && (i == 0 || i == ch_.nx)) return true;
  return false;
}

ChannelSolver::ChannelSolver(Channel ch) : ch_(std::move(ch)) {
  if (ch_.nx < 8 || ch_.ny < 8)
    throw GridTooSmall("channel grid must have Nx >= 8 and Ny >= 8");
  periodic_ = ch_.periodic;
  ncols_ = periodic_ ? ch_.nx : ch_.nx + 1;
  nnodes_ = ncols_ * (ch_.ny + 1);
  dx_ = (ch_.x1 - ch_.x0) / ch_.nx;
  dt_ = 1.0 / ch_.ny;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(ch_.nx) * ch_.ny * 16);
  const double cellw = dx_ * dt_ / 4.0;

  for (int j = 0; j < ch_.ny; ++j) {
    for (int i = 0; i < ch_.nx; ++i) {
      const int n0 = node(i, j), n1 = node(i + 1, j), n2 = node(i, j + 1),
                n3 = node(i + 1, j + 1);
      const int nd[4] = {n0, n1, n2, n3};
      double ke[4][4] = {};
      for (int gu = 0; gu < 2; ++gu) {
        for (int gv = 0; gv < 2; ++gv) {
          const double u = kGp[gu], v = kGp[gv];
          const double xg = ch_.x0 + (i + u) * dx_;
          const double tg = (j + v) * dt_;
          double a11, a12, a22;
          metric(ch_, xg, tg, a11, a12, a22);
          const double du[4] = {-(1 - v), (1 - v), -v, v};
          const double dv[4] = {-(1 - u), -u, (1 - u), u};
          double gx[4], gt[4];
          for (int a = 0; a < 4; ++a) {
            gx[a] = du[a] / dx_;
            gt[a] = dv[a] / dt_;
          }
          for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
              ke[a][b] += cellw * (a11 * gx[a] * gx[b] + a22 * gt[a] * gt[b] +
                                   a12 * (gx[a] * gt[b] + gt[a] * gx[b]));
        }
      }
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          trips.emplace_back(nd[a], nd[b], ke[a][b]);
    }
  }
  K_.resize(nnodes_, nnodes_);
  K_.setFromTriplets(trips.begin(), trips.end());

  interior_of_node_.assign(nnodes_, -1);
  for (int j = 0; j <= ch_.ny; ++j)
    for (int i = 0; i < ncols_; ++i)
      if (!is_boundary(i, j)) {
        interior_of_node_[node(i, j)] = static_cast<int>(node_of_interior_.size());
        node_of_interior_.push_back(node(i, j));
      }

  const int ni = static_cast<int>(node_of_interior_.size());
  std::vector<Eigen::Triplet<double>> itrips;
  for (int k = 0; k < K_.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(K_, k); it; ++it) {
      const int r = interior_of_node_[it.row()], c = interior_of_node_[it.col()];
      if (r >= 0 && c >= 0) itrips.emplace_back(r, c, it.value());
    }
  Kii_.resize(ni, ni);
  Kii_.setFromTriplets(itrips.begin(), itrips.end());

  ldlt_ = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
  ldlt_->compute(Kii_);
}

GridField ChannelSolver::solve(const ArrayXd& bottom_trace,
                               const ArrayXd& top_trace) const {
  const int ny = ch_.ny;
  GridField f;
  f.periodic = periodic_;
  f.nx = ch_.nx;
  f.ny = ny;
  f.u = MatrixXd::Zero(ny + 1, ncols_);

  VectorXd full = VectorXd::Zero(nnodes_);
  for (int i = 0; i < ncols_; ++i) {
    full[node(i, 0)] = bottom_trace[i];
    full[node(i, ny)] = top_trace[i];
  }
  // side walls, when present, carry homogeneous data
  if (!periodic_)
    for (int j = 1; j < ny; ++j) {
      full[node(0, j)] = 0.0;
      full[node(ch_.nx, j)] = 0.0;
    }

  VectorXd r_full = -(K_ * full);
  const int ni = static_cast<int>(node_of_interior_.size());
  VectorXd rhs(ni);
  for (int k = 0; k < ni; ++k) rhs[k] = r_full[node_of_interior_[k]];

  VectorXd sol;
  bool ok = false;
  if (ldlt_->info() == Eigen::Success) {
    sol = ldlt_->solve(rhs);
    const double rn = rhs.norm();
    ok = (ldlt_->info() == Eigen::Success) &&
         ((Kii_ * sol - rhs).norm() <= 1e-10 * std::max(rn, 1e-30));
  }
  if (!ok) {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                             Eigen::Lower | Eigen::Upper>
        cg;
    cg.setTolerance(1e-12);
    cg.setMaxIterations(20L * ni);
    cg.compute(Kii_);
    sol = cg.solve(rhs);
    if (cg.info() != Eigen::Success)
      throw SolverDiverged("direct factorization and CG fallback both failed");
  }

  for (int k = 0; k < ni; ++k) full[node_of_interior_[k]] = sol[k];
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < ncols_; ++i) f.u(j, i) = full[node(i, j)];
  return f;
}

VectorXd ChannelSolver::nodal_vector(const GridField& a) const {
  VectorXd v(nnodes_);
  for (int j = 0; j <= ch_.ny; ++j)
    for (int i = 0; i < ncols_; ++i) v[node(i, j)] = a.u(j, i);
  return v;
}

double ChannelSolver::bilinear(const GridField& a, const GridField& b) const {
  return nodal_vector(a).dot(K_ * nodal_vector(b));
}

// ---------------------------------------------------------------------------
// Operations on the periodic strip
// ---------------------------------------------------------------------------

GridField solve_harmonic(const StripDomain& dom, const BoundaryDensity& bottom,
                         const BoundaryDensity& top) {
  ChannelSolver solver(dom.channel());
  ArrayXd bt(dom.nx() + 1), tt(dom.nx() + 1);
  for (int i = 0; i <= dom.nx(); ++i) {
    bt[i] = bottom.values[i];
    tt[i] = top.values[i];
  }
  return solver.solve(bt, tt);
}

namespace {

// Gradient (in physical coordinates) along the top row of the mapped grid.
void top_gradient(const GridField& f, const StripDomain& dom, ArrayXd& gx,
                  ArrayXd& gy) {
  const int nx = f.nx, ny = f.ny;
  const double dx = 2.0 / nx, dt = 1.0 / ny;
  gx.resize(nx + 1);
  gy.resize(nx + 1);
  for (int i = 0; i <= nx; ++i) {
    const double x = -1.0 + i * dx;
    const double W = dom.top(x), W1 = dom.top_d1(x);
    const double ut = (3.0 * f.at(i, ny) - 4.0 * f.at(i, ny - 1) + f.at(i, ny - 2)) / (2.0 * dt);
    const double ux = (f.at(i + 1, ny) - f.at(i - 1, ny)) / (2.0 * dx);
    const double m = W1 / W;  // (b' + t d')/d at t=1 with b=0
    gx[i] = ux - m * ut;
    gy[i] = ut / W;
  }
}

}  // namespace

BoundaryDensity normal_flux(const GridField& field, const StripDomain& dom) {
  ArrayXd gx, gy;
  top_gradient(field, dom, gx, gy);
  const int nx = field.nx;
  ArrayXd flux(nx + 1);
  for (int i = 0; i <= nx; ++i) {
    const double x = -1.0 + 2.0 * i / nx;
    const double W1 = dom.top_d1(x);
    const double r = std::sqrt(1.0 + W1 * W1);
    flux[i] = (-W1 * gx[i] + gy[i]) / r;
  }
  return BoundaryDensity(std::move(flux));
}

double bottom_flux_integral(const GridField& field, const StripDomain& dom) {
  const int nx = field.nx, ny = field.ny;
  const double dx = 2.0 / nx, dt = 1.0 / ny;
  ArrayXd vals(nx + 1);
  for (int i = 0; i <= nx; ++i) {
    const double x = -1.0 + i * dx;
    const double W = dom.top(x);
    const double ut = (-3.0 * field.at(i, 0) + 4.0 * field.at(i, 1) - field.at(i, 2)) / (2.0 * dt);
    vals[i] = -ut / W;  // d u / d(0,-1) at y=0
  }
  return trapezoid_periodic(vals, dx);
}

EnergyBreakdown energy(const GridField& field, const QField& Q,
                       const StripDomain& dom) {
  const Channel ch = dom.channel();
  const int nx = field.nx, ny = field.ny;
  const double dx = 2.0 / nx, dt = 1.0 / ny;
  const double cellw = dx * dt / 4.0;
  double dir = 0.0, vol = 0.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double c[4] = {field.at(i, j), field.at(i + 1, j),
                           field.at(i, j + 1), field.at(i + 1, j + 1)};
      for (int gu = 0; gu < 2; ++gu)
        for (int gv = 0; gv < 2; ++gv) {
          const double u = kGp[gu], v = kGp[gv];
          const double xg = -1.0 + (i + u) * dx;
          const double tg = (j + v) * dt;
          double a11, a12, a22;
          metric(ch, xg, tg, a11, a12, a22);
          const double du[4] = {-(1 - v), (1 - v), -v, v};
          const double dv[4] = {-(1 - u), -u, (1 - u), u};
          double sx = 0.0, st = 0.0;
          for (int a = 0; a < 4; ++a) {
            sx += c[a] * du[a] / dx;
            st += c[a] * dv[a] / dt;
          }
          dir += cellw * (a11 * sx * sx + 2.0 * a12 * sx * st + a22 * st * st);
          const double W = dom.top(xg);
          vol += cellw * Q.q2(xg, tg * W) * W;
        }
    }
  }
  EnergyBreakdown e;
  e.dirichlet = dir;
  e.volume = vol;
  e.total = dir + vol;
  return e;
}

GridField solve_linearized(const BoundaryDensity& psi, const QField& Q,
                           const StripDomain& dom) {
  const int nx = dom.nx();
  ArrayXd top(nx + 1);
  for (int i = 0; i <= nx; ++i) {
    const double x = -1.0 + 2.0 * i / nx;
    top[i] = Q.q(x, dom.top(x)) * psi.values[i];
  }
  ChannelSolver solver(dom.channel());
  return solver.solve(ArrayXd::Zero(nx + 1), top);
}

namespace {

struct CellLocation {
  int i, j;
  double u, v;  // local coordinates in the cell
};

CellLocation locate(const GridField& field, const StripDomain& dom, double x,
                    double y) {
  const int nx = field.nx, ny = field.ny;
  double xw = x - 2.0 * std::floor((x + 1.0) / 2.0);  // wrap into [-1,1)
  const double t = std::clamp(y / dom.top(xw), 0.0, 1.0);
  double px = (xw + 1.0) / 2.0 * nx;
  double pt = t * ny;
  CellLocation loc;
  loc.i = std::clamp(static_cast<int>(px), 0, nx - 1);
  loc.j = std::clamp(static_cast<int>(pt), 0, ny - 1);
  loc.u = px - loc.i;
  loc.v = pt - loc.j;
  return loc;
}

}  // namespace

double value_at(const GridField& field, const StripDomain& dom, double x,
                double y) {
  const CellLocation c = locate(field, dom, x, y);
  const double f00 = field.at(c.i, c.j), f10 = field.at(c.i + 1, c.j);
  const double f01 = field.at(c.i, c.j + 1), f11 = field.at(c.i + 1, c.j + 1);
  return (1 - c.u) * (1 - c.v) * f00 + c.u * (1 - c.v) * f10 +
         (1 - c.u) * c.v * f01 + c.u * c.v * f11;
}

Vector2d gradient_at(const GridField& field, const StripDomain& dom, double x,
                     double y) {
  const CellLocation c = locate(field, dom, x, y);
  const int nx = field.nx, ny = field.ny;
  const double dx = 2.0 / nx, dt = 1.0 / ny;
  const double f00 = field.at(c.i, c.j), f10 = field.at(c.i + 1, c.j);
  const double f01 = field.at(c.i, c.j + 1), f11 = field.at(c.i + 1, c.j + 1);
  const double ux = ((1 - c.v) * (f10 - f00) + c.v * (f11 - f01)) / dx;
  const double ut = ((1 - c.u) * (f01 - f00) + c.u * (f11 - f10)) / dt;
  const double xw = x - 2.0 * std::floor((x + 1.0) / 2.0);
  const double W = dom.top(xw), W1 = dom.top_d1(xw);
  const double t = std::clamp(y / W, 0.0, 1.0);
  const double m = t * W1 / W;
  return Vector2d(ux - m * ut, ut / W);
}

CriticalityReport check_criticality(const GridField& field, const QField& Q,
                                    const StripDomain& dom) {
  CriticalityReport rep;
  rep.flux = normal_flux(field, dom);
  const int nx = field.nx;
  double worst = 0.0;
  bool neg = true;
  for (int i = 0; i <= nx; ++i) {
    const double x = -1.0 + 2.0 * i / nx;
    const double f = rep.flux.values[i];
    worst = std::max(worst, std::abs(f * f - Q.q2(x, dom.top(x))));
    neg = neg && (f < 0.0);
  }
  rep.residual = worst;
  rep.flux_negative = neg;
  return rep;
}

EulerLagrangeReport check_euler_lagrange(const GridField& field,
                                         const QField& Q,
                                         const StripDomain& dom) {
  const int nx = field.nx, ny = field.ny;
  const double dx = 2.0 / nx, dt = 1.0 / ny;

  // physical gradient at every node, composed from mapped differences
  MatrixXd p1(ny + 1, nx), p2(ny + 1, nx);
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double x = -1.0 + i * dx;
      const double W = dom.top(x), W1 = dom.top_d1(x);
      const double t = j * dt;
      double ut;
      if (j == 0)
        ut = (-3.0 * field.at(i, 0) + 4.0 * field.at(i, 1) - field.at(i, 2)) / (2.0 * dt);
      else if (j == ny)
        ut = (3.0 * field.at(i, ny) - 4.0 * field.at(i, ny - 1) + field.at(i, ny - 2)) / (2.0 * dt);
      else
        ut = (field.at(i, j + 1) - field.at(i, j - 1)) / (2.0 * dt);
      const double ux = (field.at(i + 1, j) - field.at(i - 1, j)) / (2.0 * dx);
      const double m = t * W1 / W;
      p1(j, i) = ux - m * ut;
      p2(j, i) = ut / W;
    }

  auto pat = [&](const MatrixXd& p, int i, int j) {
    return p(j, (i % nx + nx) % nx);
  };

  EulerLagrangeReport rep;
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double x = -1.0 + i * dx;
      const double W = dom.top(x), W1 = dom.top_d1(x);
      const double t = j * dt;
      const double m = t * W1 / W;
      const double p1x = (pat(p1, i + 1, j) - pat(p1, i - 1, j)) / (2.0 * dx);
      const double p1t = (pat(p1, i, j + 1) - pat(p1, i, j - 1)) / (2.0 * dt);
      const double p2t = (pat(p2, i, j + 1) - pat(p2, i, j - 1)) / (2.0 * dt);
      const double lap = (p1x - m * p1t) + p2t / W;
      rep.interior_residual = std::max(rep.interior_residual, std::abs(lap));
    }

  ArrayXd gx, gy;
  top_gradient(field, dom, gx, gy);
  for (int i = 0; i <= nx; ++i) {
    const double x = -1.0 + 2.0 * i / nx;
    rep.boundary_value_residual =
        std::max(rep.boundary_value_residual, std::abs(field.at(i, ny)));
    const double gn = std::hypot(gx[i], gy[i]);
    rep.flux_residual =
        std::max(rep.flux_residual, std::abs(gn - Q.q(x, dom.top(x))));
  }
  return rep;
}

}  // namespace fbstab

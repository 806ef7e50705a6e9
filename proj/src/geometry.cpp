#include "fbstab/geometry.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace fbstab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kSigmaTableSize = 16384;  // intervals of the arclength table

// Evaluate the d-th derivative of a monomial polynomial by Horner.
double poly_eval(const ArrayXd& c, double x, int d) {
  ArrayXd dc = c;
  for (int q = 0; q < d; ++q) {
    ArrayXd next(std::max<int>(0, static_cast<int>(dc.size()) - 1));
    for (int j = 1; j < dc.size(); ++j) next[j - 1] = dc[j] * j;
    dc = next;
  }
  double v = 0.0;
  for (int j = static_cast<int>(dc.size()) - 1; j >= 0; --j) v = v * x + dc[j];
  return v;
}

ArrayXd poly_multiply(const ArrayXd& p, const ArrayXd& q) {
  if (p.size() == 0 || q.size() == 0) return ArrayXd();
  ArrayXd r = ArrayXd::Zero(p.size() + q.size() - 1);
  for (int i = 0; i < p.size(); ++i)
    for (int j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
  return r;
}

double wrap_period(double x) {
  // maps to [-1, 1)
  return x - 2.0 * std::floor((x + 1.0) / 2.0);
}

}  // namespace

ArrayXd uniform_grid(int n) {
  ArrayXd g(n + 1);
  for (int i = 0; i <= n; ++i) g[i] = -1.0 + 2.0 * i / n;
  return g;
}

double trapezoid_periodic(const ArrayXd& values, double dx) {
  const int n = static_cast<int>(values.size()) - 1;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += values[i];
  return sum * dx;
}

// ---------------------------------------------------------------------------
// PeriodicProfile
// ---------------------------------------------------------------------------

PeriodicProfile::PeriodicProfile() { finalize(); }

double PeriodicProfile::value(double x) const {
  if (!trig_) return poly_eval(poly_, wrap_period(x), 0);
  double v = mean_;
  const int kmax = static_cast<int>(std::max(cosc_.size(), sinc_.size()));
  for (int k = 1; k <= kmax; ++k) {
    if (k <= cosc_.size()) v += cosc_[k - 1] * std::cos(k * kPi * x);
    if (k <= sinc_.size()) v += sinc_[k - 1] * std::sin(k * kPi * x);
  }
  return v;
}

double PeriodicProfile::d1(double x) const {
  if (!trig_) return poly_eval(poly_, wrap_period(x), 1);
  double v = 0.0;
  const int kmax = static_cast<int>(std::max(cosc_.size(), sinc_.size()));
  for (int k = 1; k <= kmax; ++k) {
    const double om = k * kPi;
    if (k <= cosc_.size()) v += -cosc_[k - 1] * om * std::sin(om * x);
    if (k <= sinc_.size()) v += sinc_[k - 1] * om * std::cos(om * x);
  }
  return v;
}

double PeriodicProfile::d2(double x) const {
  if (!trig_) return poly_eval(poly_, wrap_period(x), 2);
  double v = 0.0;
  const int kmax = static_cast<int>(std::max(cosc_.size(), sinc_.size()));
  for (int k = 1; k <= kmax; ++k) {
    const double om = k * kPi, om2 = om * om;
    if (k <= cosc_.size()) v += -cosc_[k - 1] * om2 * std::cos(om * x);
    if (k <= sinc_.size()) v += -sinc_[k - 1] * om2 * std::sin(om * x);
  }
  return v;
}

double PeriodicProfile::d3(double x) const {
  if (!trig_) return poly_eval(poly_, wrap_period(x), 3);
  double v = 0.0;
  const int kmax = static_cast<int>(std::max(cosc_.size(), sinc_.size()));
  for (int k = 1; k <= kmax; ++k) {
    const double om = k * kPi, om3 = om * om * om;
    if (k <= cosc_.size()) v += cosc_[k - 1] * om3 * std::sin(om * x);
    if (k <= sinc_.size()) v += -sinc_[k - 1] * om3 * std::cos(om * x);
  }
  return v;
}

bool PeriodicProfile::is_constant() const {
  if (trig_)
    return (cosc_.size() == 0 || cosc_.abs().maxCoeff() == 0.0) &&
           (sinc_.size() == 0 || sinc_.abs().maxCoeff() == 0.0);
  return poly_.size() <= 1;
}

void PeriodicProfile::finalize() {
  const int n = kSigmaTableSize;
  const double h = 2.0 / n;
  sigma_table_.resize(n + 1);
  sigma_table_[0] = 0.0;
  double mn = value(-1.0), mx = mn;
  for (int i = 0; i < n; ++i) {
    const double x0 = -1.0 + i * h, x1 = x0 + h, xm = 0.5 * (x0 + x1);
    auto speed = [this](double x) { double d = d1(x); return std::sqrt(1.0 + d * d); };
    sigma_table_[i + 1] = sigma_table_[i] + h / 6.0 * (speed(x0) + 4.0 * speed(xm) + speed(x1));
    const double v = value(x1);
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  min_value_ = mn;
  max_value_ = mx;
  length_ = sigma_table_[n];
}

double PeriodicProfile::arclength(double x) const {
  if (is_constant()) return x + 1.0;
  const int n = kSigmaTableSize;
  const double h = 2.0 / n;
  const double xi = std::clamp(x, -1.0, 1.0);
  int i = std::min(static_cast<int>((xi + 1.0) / h), n - 1);
  const double x0 = -1.0 + i * h;
  if (xi <= x0) return sigma_table_[i];
  auto speed = [this](double t) { double d = d1(t); return std::sqrt(1.0 + d * d); };
  const double xm = 0.5 * (x0 + xi);
  return sigma_table_[i] + (xi - x0) / 6.0 * (speed(x0) + 4.0 * speed(xm) + speed(xi));
}

PeriodicProfile make_profile(const ProfileSpec& spec) {
  PeriodicProfile p;
  if (const auto* c = std::get_if<ConstantProfileSpec>(&spec)) {
    p.trig_ = true;
    p.mean_ = c->value;
    p.cosc_.resize(0);
    p.sinc_.resize(0);
  } else if (const auto* f = std::get_if<FourierProfileSpec>(&spec)) {
    p.trig_ = true;
    p.mean_ = f->mean;
    p.cosc_ = f->cos_coeffs;
    p.sinc_ = f->sin_coeffs;
  } else if (const auto* q = std::get_if<PolyProfileSpec>(&spec)) {
    p.trig_ = false;
    p.poly_ = q->coeffs;
    const double scale = std::max(1.0, q->coeffs.size() ? q->coeffs.abs().maxCoeff() : 0.0);
    for (int d = 0; d <= 3; ++d) {
      const double gap = std::abs(poly_eval(q->coeffs, 1.0, d) - poly_eval(q->coeffs, -1.0, d));
      if (gap > 1e-9 * scale)
        throw NotPeriodic("profile polynomial: derivative " + std::to_string(d) +
                          " mismatch " + std::to_string(gap) + " across x=+-1");
    }
  } else if (const auto* s = std::get_if<SampleProfileSpec>(&spec)) {
    const int n = static_cast<int>(s->values.size());
    if (n < 4) throw NotPeriodic("profile samples: need at least 4 points");
    p.trig_ = true;
    p.mean_ = s->values.mean();
    const int kmax = (n - 1) / 2;
    p.cosc_ = ArrayXd::Zero(n / 2);
    p.sinc_ = ArrayXd::Zero(kmax);
    for (int k = 1; k <= kmax; ++k) {
      double a = 0.0, b = 0.0;
      for (int i = 0; i < n; ++i) {
        const double x = -1.0 + 2.0 * i / n;
        a += s->values[i] * std::cos(k * kPi * x);
        b += s->values[i] * std::sin(k * kPi * x);
      }
      p.cosc_[k - 1] = 2.0 * a / n;
      p.sinc_[k - 1] = 2.0 * b / n;
    }
    if (n % 2 == 0) {
      double a = 0.0;
      for (int i = 0; i < n; ++i)
        a += s->values[i] * std::cos((n / 2) * kPi * (-1.0 + 2.0 * i / n));
      p.cosc_[n / 2 - 1] = a / n;
    }
  }
  p.finalize();
  if (p.min_value() <= 0.0)
    throw NonPositiveProfile("profile must satisfy w > 0; min w = " +
                             std::to_string(p.min_value()));
  return p;
}

// ---------------------------------------------------------------------------
// BumpPerturbation
// ---------------------------------------------------------------------------

BumpPerturbation::BumpPerturbation() : coeffs_(ArrayXd::Zero(1)) {}

double BumpPerturbation::eval(double x, int derivative) const {
  if (x < a_ || x > b_) return 0.0;
  return poly_eval(coeffs_, x, derivative);
}

bool BumpPerturbation::is_zero() const {
  return coeffs_.size() == 0 || coeffs_.abs().maxCoeff() == 0.0;
}

double BumpPerturbation::c2_norm(int samples) const {
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double x = a_ + (b_ - a_) * i / samples;
    m0 = std::max(m0, std::abs(value(x)));
    m1 = std::max(m1, std::abs(d1(x)));
    m2 = std::max(m2, std::abs(d2(x)));
  }
  return m0 + m1 + m2;
}

double BumpPerturbation::c2alpha_surrogate(double alpha, int samples) const {
  ArrayXd x(samples + 1), p2(samples + 1);
  for (int i = 0; i <= samples; ++i) {
    x[i] = a_ + (b_ - a_) * i / samples;
    p2[i] = d2(x[i]);
  }
  double hoelder = 0.0;
  for (int i = 0; i <= samples; ++i)
    for (int j = i + 1; j <= samples; ++j)
      hoelder = std::max(hoelder, std::abs(p2[i] - p2[j]) / std::pow(x[j] - x[i], alpha));
  return c2_norm(samples) + hoelder;
}

BumpPerturbation BumpPerturbation::scaled(double factor) const {
  BumpPerturbation out = *this;
  out.coeffs_ = coeffs_ * factor;
  return out;
}

BumpPerturbation make_bump(const ArrayXd& coeffs, double a, double b) {
  if (!(-1.0 < a && a < b && b < 1.0))
    throw Error("bump support must satisfy -1 < a < b < 1");
  BumpPerturbation phi;
  phi.a_ = a;
  phi.b_ = b;
  phi.coeffs_ = coeffs.size() ? coeffs : ArrayXd::Zero(1);
  const double scale = std::max(1.0, phi.coeffs_.abs().maxCoeff());
  for (int d = 0; d <= 3; ++d) {
    const double va = poly_eval(phi.coeffs_, a, d);
    if (std::abs(va) > 1e-10 * scale) throw EndpointConditionViolated(d, a, va);
    const double vb = poly_eval(phi.coeffs_, b, d);
    if (std::abs(vb) > 1e-10 * scale) throw EndpointConditionViolated(d, b, vb);
  }
  return phi;
}

BumpPerturbation make_window_bump(const ArrayXd& factor, double a, double b) {
  // (x-a)^4 (b-x)^4 expanded into monomial coefficients
  ArrayXd xa(2), bx(2);
  xa << -a, 1.0;
  bx << b, -1.0;
  ArrayXd window = ArrayXd::Ones(1);
  for (int i = 0; i < 4; ++i) window = poly_multiply(window, xa);
  for (int i = 0; i < 4; ++i) window = poly_multiply(window, bx);
  ArrayXd f = factor.size() ? factor : ArrayXd::Ones(1);
  return make_bump(poly_multiply(window, f), a, b);
}

// ---------------------------------------------------------------------------
// CurveFrame
// ---------------------------------------------------------------------------

CurveFrame frame(const PeriodicProfile& profile, const BumpPerturbation* bump,
                 double s, const ArrayXd& x_grid) {
  const int n = static_cast<int>(x_grid.size());
  CurveFrame f;
  f.x = x_grid;
  f.tau_x.resize(n); f.tau_y.resize(n);
  f.nu_x.resize(n);  f.nu_y.resize(n);
  f.kappa.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = x_grid[i];
    const double w1 = profile.d1(x) + (bump ? s * bump->d1(x) : 0.0);
    const double w2 = profile.d2(x) + (bump ? s * bump->d2(x) : 0.0);
    const double r = std::sqrt(1.0 + w1 * w1);
    f.tau_x[i] = 1.0 / r;
    f.tau_y[i] = w1 / r;
    f.nu_x[i] = -w1 / r;
    f.nu_y[i] = 1.0 / r;
    f.kappa[i] = graph_curvature(w1, w2);
  }
  return f;
}

// ---------------------------------------------------------------------------
// BoundaryDensity and boundary metrics
// ---------------------------------------------------------------------------

BoundaryDensity BoundaryDensity::constant(double c, int n) {
  return BoundaryDensity(ArrayXd::Constant(n + 1, c));
}

BoundaryDensity BoundaryDensity::sample(const std::function<double(double)>& f,
                                        int n, bool compact) {
  ArrayXd v(n + 1);
  const ArrayXd g = uniform_grid(n);
  for (int i = 0; i <= n; ++i) v[i] = f(g[i]);
  return BoundaryDensity(std::move(v), compact);
}

double l2_norm_gamma(const BoundaryDensity& psi, const PeriodicProfile& curve) {
  const int n = psi.intervals();
  const double dx = 2.0 / n;
  ArrayXd integrand(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double x = -1.0 + i * dx;
    const double w1 = curve.d1(x);
    integrand[i] = psi.values[i] * psi.values[i] * std::sqrt(1.0 + w1 * w1);
  }
  return std::sqrt(trapezoid_periodic(integrand, dx));
}

double h_half_norm(const BoundaryDensity& psi, const PeriodicProfile& curve) {
  const int n = psi.intervals();
  const double dx = 2.0 / n;
  const double L = curve.length();
  ArrayXd sigma(n), speed(n);
  for (int i = 0; i < n; ++i) {
    const double x = -1.0 + i * dx;
    sigma[i] = curve.arclength(x);
    const double w1 = curve.d1(x);
    speed[i] = std::sqrt(1.0 + w1 * w1);
  }
  double total = 0.0;
  const int kmax = n / 2 - 1;
  for (int k = 0; k <= kmax; ++k) {
    std::complex<double> c(0.0, 0.0);
    const double om = 2.0 * kPi * k / L;
    for (int i = 0; i < n; ++i)
      c += psi.values[i] * std::polar(1.0, -om * sigma[i]) * speed[i] * dx;
    c /= std::sqrt(L);
    const double weight = 1.0 + 2.0 * kPi * k / L;
    total += weight * std::norm(c) * (k == 0 ? 1.0 : 2.0);
  }
  return std::sqrt(total);
}

BoundaryDensity boundary_mode(const PeriodicProfile& curve, int index, int n) {
  const double L = curve.length();
  ArrayXd v(n + 1);
  if (index == 0) {
    v.setConstant(1.0 / std::sqrt(L));
  } else {
    const int k = (index + 1) / 2;
    const bool is_cos = (index % 2 == 1);
    const double amp = std::sqrt(2.0 / L);
    for (int i = 0; i <= n; ++i) {
      const double x = -1.0 + 2.0 * i / n;
      const double theta = 2.0 * kPi * k * curve.arclength(x) / L;
      v[i] = amp * (is_cos ? std::cos(theta) : std::sin(theta));
    }
  }
  return BoundaryDensity(std::move(v));
}

double h_half_weight(const PeriodicProfile& curve, int index) {
  const int k = (index + 1) / 2;
  return 1.0 + 2.0 * kPi * k / curve.length();
}

}  // namespace fbstab

#include "rmtlab/free_convolution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rmtlab {

EmpiricalMeasure::EmpiricalMeasure(Vector atoms) : atoms_(std::move(atoms)) {
  if (atoms_.size() == 0) throw ParameterError("empirical measure needs at least one atom");
  if (!atoms_.allFinite()) throw ParameterError("empirical measure atoms must be finite");
  std::sort(atoms_.data(), atoms_.data() + atoms_.size());
}

Complex EmpiricalMeasure::stieltjes(Complex w) const {
  Complex sum = 0.0;
  for (Index i = 0; i < atoms_.size(); ++i) sum += 1.0 / (atoms_(i) - w);
  return sum / static_cast<double>(atoms_.size());
}

void EmpiricalMeasure::stieltjes_with_derivative(Complex w, Complex& value, Complex& derivative) const {
  Complex s1 = 0.0;
  Complex s2 = 0.0;
  for (Index i = 0; i < atoms_.size(); ++i) {
    const Complex g = 1.0 / (atoms_(i) - w);
    s1 += g;
    s2 += g * g;
  }
  const double n = static_cast<double>(atoms_.size());
  value = s1 / n;
  derivative = s2 / n;
}

double mfc_residual(const EmpiricalMeasure& mu, double t, Complex z, Complex m) {
  return std::abs(m - mu.stieltjes(z + t * m));
}

namespace {

struct LevelSolver {
  const EmpiricalMeasure& mu;
  double t;
  const MfcOptions& opt;
  long iterations = 0;
  bool projected = false;

  void keep_upper(Complex& m, double floor) {
    if (!(m.imag() > 0.0)) {
      m = {m.real(), floor};
      projected = true;
    }
  }

  // Damped Newton on F(m) = m - m_0(z + t m). Returns false if it stalls or
  // leaves the upper half plane.
  bool newton(Complex z, Complex& m, double target, int max_steps = 60) {
    Complex m0, d;
    mu.stieltjes_with_derivative(z + t * m, m0, d);
    Complex F = m - m0;
    double res = std::abs(F);
    // Polish past the target so reported residuals sit at the rounding floor.
    const double polish = 1e-3 * target;
    for (int k = 0; k < max_steps; ++k) {
      if (res <= polish) return true;
      ++iterations;
      const Complex step = F / (1.0 - t * d);
      double scale = 1.0;
      bool improved = false;
      for (int h = 0; h < 30; ++h, scale *= 0.5) {
        const Complex trial = m - scale * step;
        if (!(trial.imag() > 0.0)) continue;
        Complex tm0, td;
        mu.stieltjes_with_derivative(z + t * trial, tm0, td);
        const double tres = std::abs(trial - tm0);
        if (tres < res) {
          m = trial;
          m0 = tm0;
          d = td;
          F = m - m0;
          res = tres;
          improved = true;
          break;
        }
      }
      if (!improved) return res <= target;
    }
    return res <= target;
  }

  void picard(Complex z, Complex& m, double target, double floor) {
    for (long k = 0; k < opt.max_iterations; ++k) {
      const Complex image = mu.stieltjes(z + t * m);
      if (std::abs(m - image) <= target) return;
      ++iterations;
      m = (1.0 - opt.damping) * m + opt.damping * image;
      keep_upper(m, floor);
    }
  }

  void solve(Complex z, Complex& m) {
    if (newton(z, m, opt.tolerance)) return;
    picard(z, m, 1e-8, std::max(opt.eta_floor, 1e-3 * z.imag()));
    newton(z, m, opt.tolerance, 100);
  }
};

}  // namespace

MfcSolution solve_mfc_detailed(const EmpiricalMeasure& mu, double t, const HalfPlanePoint& z,
                               const MfcOptions& options, const Complex* warm_start) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ParameterError("free convolution time must be >= 0");
  MfcSolution out;
  const Complex zc = z.z();
  if (t == 0.0) {
    out.m = mu.stieltjes(zc);
    return out;
  }
  LevelSolver solver{mu, t, options};
  Complex m;
  if (warm_start != nullptr && warm_start->imag() > 0.0) {
    m = *warm_start;
    solver.solve(zc, m);
  } else {
    // At eta0 >= 2 sqrt(t), |t m_0'| <= 1/4 and the damped Picard map contracts.
    const double eta0 = std::max(z.eta, 2.0 * std::sqrt(t) + 1.0);
    m = mu.stieltjes(Complex(z.E, eta0));
    double eta = eta0;
    for (;;) {
      solver.solve(Complex(z.E, eta), m);
      if (eta <= z.eta) break;
      eta = std::max(z.eta, 0.5 * eta);
    }
  }
  out.m = m;
  out.iterations = solver.iterations;
  out.projected = solver.projected;
  out.residual = mfc_residual(mu, t, zc, m);
  if (!(out.residual <= options.tolerance) || !(m.imag() > 0.0))
    throw ConvergenceError("free-convolution fixed point did not reach the residual target", out.iterations,
                           out.residual);
  return out;
}

Complex solve_mfc(const EmpiricalMeasure& mu, double t, const HalfPlanePoint& z) {
  return solve_mfc_detailed(mu, t, z).m;
}

double FreeConvolutionState::residual_max() const {
  double r = 0.0;
  for (double v : residuals) r = std::max(r, v);
  return r;
}

void FreeConvolutionState::assert_residuals(double tolerance) const {
  for (std::size_t k = 0; k < residuals.size(); ++k)
    if (!(residuals[k] <= tolerance))
      throw ContractViolation("stored m_fc value at index " + std::to_string(k) + " has residual " +
                              std::to_string(residuals[k]));
}

FreeConvolutionState solve_grid(const EmpiricalMeasure& mu, double t, const SpectralDomain& domain, Index nE,
                                Index nEta, const MfcOptions& options) {
  FreeConvolutionState state;
  state.t = t;
  state.nE = nE;
  state.nEta = nEta;
  state.points = domain.grid(nE, nEta);
  const std::size_t total = state.points.size();
  state.solutions.resize(total);
  state.residuals.resize(total);
  state.projected.resize(total);
  for (Index e = 0; e < nE; ++e) {
    bool have = false;
    Complex previous;
    for (Index k = nEta - 1; k >= 0; --k) {
      const auto idx = static_cast<std::size_t>(e * nEta + k);
      const MfcSolution s = solve_mfc_detailed(mu, t, state.points[idx], options, have ? &previous : nullptr);
      state.solutions[idx] = s.m;
      state.residuals[idx] = s.residual;
      state.projected[idx] = s.projected;
      previous = s.m;
      have = true;
    }
  }
  return state;
}

FreeConvolutionState solve_points(const EmpiricalMeasure& mu, double t, const std::vector<HalfPlanePoint>& points,
                                  const MfcOptions& options) {
  FreeConvolutionState state;
  state.t = t;
  state.nE = static_cast<Index>(points.size());
  state.nEta = 1;
  state.points = points;
  for (const auto& z : points) {
    const MfcSolution s = solve_mfc_detailed(mu, t, z, options);
    state.solutions.push_back(s.m);
    state.residuals.push_back(s.residual);
    state.projected.push_back(s.projected);
  }
  return state;
}

std::vector<Complex> g_weights(const EmpiricalMeasure& mu, double t, const HalfPlanePoint& z, Complex m_fc,
                               double stale_tolerance) {
  const Complex w = z.z() + t * m_fc;
  if (!(mfc_residual(mu, t, z.z(), m_fc) <= stale_tolerance))
    throw ContractViolation("m_fc is not a converged fixed point for this (t, z)");
  std::vector<Complex> g(static_cast<std::size_t>(mu.size()));
  for (Index i = 0; i < mu.size(); ++i) g[static_cast<std::size_t>(i)] = 1.0 / (mu.atoms()(i) - w);
  return g;
}

double fc_density(const EmpiricalMeasure& mu, double t, double E, const DensityOptions& options) {
  if (!(t > 0.0)) throw ParameterError("fc_density needs t > 0");
  const double floor = 1e-7 * std::max(1.0, std::sqrt(t));
  double eta = std::max(options.start_eta * std::max(1.0, std::sqrt(t)), floor);
  MfcSolution s = solve_mfc_detailed(mu, t, HalfPlanePoint(E, eta));
  double value = s.m.imag() / std::numbers::pi;
  while (eta > floor) {
    eta = std::max(floor, eta * options.shrink);
    s = solve_mfc_detailed(mu, t, HalfPlanePoint(E, eta), {}, &s.m);
    const double next = s.m.imag() / std::numbers::pi;
    const bool settled = std::abs(next - value) <= options.relative_change * std::abs(next);
    value = next;
    if (settled) break;
  }
  return std::max(value, 0.0);
}

namespace {

// Root s = v^2 in (0, t] of (t/N) sum 1/(d_i^2 + s) = 1, or 0 when
// (t/N) sum 1/d_i^2 <= 1.
double boundary_v_squared(const Vector& atoms, double t, double u) {
  const double n = static_cast<double>(atoms.size());
  auto h = [&](double s, double& slope) {
    double s1 = 0.0;
    double s2 = 0.0;
    for (Index i = 0; i < atoms.size(); ++i) {
      const double d = atoms(i) - u;
      const double q = 1.0 / (d * d + s);
      s1 += q;
      s2 += q * q;
    }
    slope = -t * s2 / n;
    return t * s1 / n - 1.0;
  };
  double slope = 0.0;
  const double at_zero = h(0.0, slope);
  if (!(at_zero > 0.0)) return 0.0;
  double lo = 0.0;
  double hi = t;
  double s = 0.5 * t;
  for (int k = 0; k < 200; ++k) {
    const double value = h(s, slope);
    if (value > 0.0)
      lo = s;
    else
      hi = s;
    if (std::abs(value) <= 1e-15 || hi - lo <= 1e-17 * hi) break;
    const double candidate = s - value / slope;
    s = (candidate > lo && candidate < hi) ? candidate : 0.5 * (lo + hi);
  }
  return s;
}

}  // namespace

BoundaryPoint fc_boundary(const EmpiricalMeasure& mu, double t, double u) {
  if (!(t > 0.0)) throw ParameterError("boundary values need t > 0");
  const Vector& atoms = mu.atoms();
  const double n = static_cast<double>(atoms.size());
  BoundaryPoint b;
  b.u = u;
  b.v = std::sqrt(boundary_v_squared(atoms, t, u));
  const Complex w(u, b.v);
  Complex m0 = 0.0;
  double angle = 0.0;
  for (Index i = 0; i < atoms.size(); ++i) {
    m0 += 1.0 / (atoms(i) - w);
    angle += std::atan2(b.v, atoms(i) - u);
  }
  m0 /= n;
  b.energy = u - t * m0.real();
  b.cdf = (angle / n - 0.5 * t * std::imag(m0 * m0)) / std::numbers::pi;
  b.cdf = std::clamp(b.cdf, 0.0, 1.0);
  b.density = b.v > 0.0 ? m0.imag() / std::numbers::pi : 0.0;
  return b;
}

namespace {

double boundary_bracket_low(const EmpiricalMeasure& mu, double t) { return mu.min() - std::sqrt(t) - 1.0; }
double boundary_bracket_high(const EmpiricalMeasure& mu, double t) { return mu.max() + std::sqrt(t) + 1.0; }

// Smallest u in [lo, hi] with F(u) >= target, given F(lo) < target <= F(hi).
double invert_cdf(const EmpiricalMeasure& mu, double t, double target, double lo, double flo, double hi, double fhi) {
  double a = lo, fa = flo - target;
  double b = hi, fb = fhi - target;
  int side = 0;
  for (int k = 0; k < 200; ++k) {
    if (b - a <= 1e-15 * (1.0 + std::abs(a) + std::abs(b))) break;
    double c = (a * fb - b * fa) / (fb - fa);
    if (!(c > a && c < b)) c = 0.5 * (a + b);
    const double fc = fc_boundary(mu, t, c).cdf - target;
    if (std::abs(fc) <= 1e-13) {
      b = c;
      fb = fc;
      break;
    }
    if (fc < 0.0) {
      a = c;
      fa = fc;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      b = c;
      fb = fc;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
  }
  // F is flat where the density vanishes; push to the left end of the level set.
  if (fc_boundary(mu, t, b).v == 0.0) {
    double left = a;
    for (int k = 0; k < 200 && b - left > 1e-15 * (1.0 + std::abs(b)); ++k) {
      const double mid = 0.5 * (left + b);
      if (fc_boundary(mu, t, mid).cdf >= target - 1e-13)
        b = mid;
      else
        left = mid;
    }
  }
  return b;
}

}  // namespace

ClassicalLocations classical_locations(const EmpiricalMeasure& mu, double t, Index N) {
  if (!(t > 0.0)) throw ParameterError("classical_locations needs t > 0");
  if (N < 1) throw ParameterError("classical_locations needs N >= 1");
  const double lo = boundary_bracket_low(mu, t);
  const double hi = boundary_bracket_high(mu, t);
  const Index uniform = 8 * std::max<Index>(N, mu.size());
  std::vector<double> us;
  us.reserve(static_cast<std::size_t>(uniform + mu.size() + 1));
  for (Index k = 0; k <= uniform; ++k) us.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(uniform));
  for (Index i = 0; i < mu.size(); ++i) us.push_back(mu.atoms()(i));
  std::sort(us.begin(), us.end());
  us.erase(std::unique(us.begin(), us.end()), us.end());
  std::vector<double> F(us.size());
  for (std::size_t k = 0; k < us.size(); ++k) F[k] = fc_boundary(mu, t, us[k]).cdf;
  F.front() = 0.0;
  F.back() = 1.0;
  for (std::size_t k = 1; k < F.size(); ++k) F[k] = std::max(F[k], F[k - 1]);

  ClassicalLocations out;
  out.t = t;
  out.gamma.resize(N);
  for (Index i = 1; i <= N; ++i) {
    const double target = i == N ? 1.0 - 1e-13 : static_cast<double>(i) / static_cast<double>(N);
    const auto it = std::lower_bound(F.begin(), F.end(), target);
    const auto k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - F.begin()));
    const double u = invert_cdf(mu, t, target, us[k - 1], F[k - 1], us[k], F[k]);
    out.gamma(i - 1) = fc_boundary(mu, t, u).energy;
  }
  for (Index i = 1; i < N; ++i) out.gamma(i) = std::max(out.gamma(i), out.gamma(i - 1));
  return out;
}

double fc_cdf(const EmpiricalMeasure& mu, double t, double E) {
  if (!(t > 0.0)) throw ParameterError("fc_cdf needs t > 0");
  double lo = boundary_bracket_low(mu, t);
  double hi = boundary_bracket_high(mu, t);
  while (fc_boundary(mu, t, lo).energy > E) lo -= 2.0 * (hi - lo);
  while (fc_boundary(mu, t, hi).energy < E) hi += 2.0 * (hi - lo);
  for (int k = 0; k < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo) + std::abs(hi)); ++k) {
    const double mid = 0.5 * (lo + hi);
    if (fc_boundary(mu, t, mid).energy < E)
      lo = mid;
    else
      hi = mid;
  }
  return fc_boundary(mu, t, 0.5 * (lo + hi)).cdf;
}

FcDiagnostics fc_diagnostics(const EmpiricalMeasure& mu, double t, const SpectralDomain& domain, double constant,
                             Index nE, Index nEta) {
  if (!(t > 0.0)) throw ParameterError("fc_diagnostics needs t > 0");
  if (!(constant > 0.0)) throw ParameterError("diagnostic constant must be positive");
  const FreeConvolutionState state = solve_grid(mu, t, domain, nE, nEta);
  FcDiagnostics d;
  d.t = t;
  d.constant = constant;
  d.points = static_cast<Index>(state.size());
  d.log_n = std::log(std::max<double>(2.0, static_cast<double>(mu.size())));
  d.min_im_m = std::numeric_limits<double>::infinity();
  d.max_im_m = 0.0;
  for (std::size_t k = 0; k < state.size(); ++k) {
    const Complex m = state.solutions[k];
    d.min_im_m = std::min(d.min_im_m, m.imag());
    d.max_im_m = std::max(d.max_im_m, m.imag());
    const auto g = g_weights(mu, t, state.points[k], m);
    double mean_abs = 0.0;
    for (const auto& v : g) mean_abs += std::abs(v);
    d.max_mean_abs_g = std::max(d.max_mean_abs_g, mean_abs / static_cast<double>(g.size()));
  }
  d.residual_max = state.residual_max();
  d.im_bound_violated = d.min_im_m < 1.0 / constant || d.max_im_m > constant;
  d.g_sum_bound_violated = d.max_mean_abs_g > constant * d.log_n;
  return d;
}

}  // namespace rmtlab

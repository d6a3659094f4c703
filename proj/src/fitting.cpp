#include "epchain/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include <unsupported/Eigen/LevenbergMarquardt>

#include "epchain/error.hpp"
#include "epchain/parallel.hpp"

namespace epchain {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Line {
  double intercept, slope, ssr;
};

Line regress(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw UsageError("regression needs distinct abscissae");
  const double b = sxy / sxx, a = my - b * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < x.size(); ++i) ssr += std::pow(y[i] - a - b * x[i], 2);
  return {a, b, ssr};
}

void check_series(const std::vector<double>& t, const std::vector<double>& y, std::size_t min_points) {
  if (t.size() != y.size()) throw UsageError("time and value arrays differ in length");
  if (t.size() < min_points) throw UsageError("series too short to fit");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) throw UsageError("times must be strictly increasing");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw NumericalError("series contains non-finite values");
  }
}

// Indices [0, n) with t <= t_end, at least min_points of them.
std::size_t window_size(const std::vector<double>& t, double t_end, std::size_t min_points) {
  std::size_t n = 0;
  while (n < t.size() && t[n] <= t_end + 1e-12 * std::abs(t_end)) ++n;
  return std::min(t.size(), std::max(n, min_points));
}

bool lm_converged(Eigen::LevenbergMarquardtSpace::Status s) {
  using namespace Eigen::LevenbergMarquardtSpace;
  switch (s) {
    case RelativeReductionTooSmall:
    case RelativeErrorTooSmall:
    case RelativeErrorAndReductionTooSmall:
    case CosinusTooSmall:
    case FtolTooSmall:
    case XtolTooSmall:
    case GtolTooSmall:
      return true;
    default:
      return false;
  }
}

// Residuals r_i = (model(t_i) - y_i) / scale with an analytic Jacobian.
template <class Model>
struct CurveFunctor : Eigen::DenseFunctor<double> {
  const double* t;
  const double* y;
  double scale;
  Model model;

  CurveFunctor(int params, int points, const double* t_, const double* y_, double s, Model m)
      : Eigen::DenseFunctor<double>(params, points), t(t_), y(y_), scale(s), model(m) {}

  int operator()(const VectorXd& p, VectorXd& r) const {
    for (int i = 0; i < values(); ++i) r[i] = (model.value(p, t[i]) - y[i]) / scale;
    return 0;
  }
  int df(const VectorXd& p, MatrixXd& jac) const {
    for (int i = 0; i < values(); ++i) {
      VectorXd g = model.gradient(p, t[i]);
      jac.row(i) = g.transpose() / scale;
    }
    return 0;
  }
};

struct ExpModel {  // p = (A, rate)
  double value(const VectorXd& p, double t) const { return p[0] * std::exp(p[1] * t); }
  VectorXd gradient(const VectorXd& p, double t) const {
    const double e = std::exp(p[1] * t);
    VectorXd g(2);
    g << e, p[0] * t * e;
    return g;
  }
};

struct CosModel {  // p = (B, omega, theta, C)
  double value(const VectorXd& p, double t) const { return p[0] * std::cos(p[1] * t + p[2]) + p[3]; }
  VectorXd gradient(const VectorXd& p, double t) const {
    const double c = std::cos(p[1] * t + p[2]), s = std::sin(p[1] * t + p[2]);
    VectorXd g(4);
    g << c, -p[0] * t * s, -p[0] * s, 1.0;
    return g;
  }
};

template <class Model>
std::pair<Eigen::LevenbergMarquardtSpace::Status, int> refine(VectorXd& p, const std::vector<double>& t,
                                                              const std::vector<double>& y, std::size_t n,
                                                              const FitOptions& opt) {
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(y[i]));
  if (scale == 0.0) scale = 1.0;
  CurveFunctor<Model> f(static_cast<int>(p.size()), static_cast<int>(n), t.data(), y.data(), scale, Model{});
  Eigen::LevenbergMarquardt<CurveFunctor<Model>> lm(f);
  lm.setXtol(opt.rel_tol);
  lm.setFtol(opt.rel_tol);
  lm.setMaxfev(opt.max_iterations);
  const auto status = lm.minimize(p);
  return {status, static_cast<int>(lm.iterations())};
}

template <class Model>
double rms_of(const VectorXd& p, const std::vector<double>& t, const std::vector<double>& y, std::size_t n) {
  Model m;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::pow(m.value(p, t[i]) - y[i], 2);
  return std::sqrt(s / static_cast<double>(n));
}

double periodogram(const std::vector<double>& t, const std::vector<double>& yc, double w) {
  cplx acc{};
  for (std::size_t i = 0; i < t.size(); ++i) acc += yc[i] * std::polar(1.0, -w * t[i]);
  return std::norm(acc);
}

}  // namespace

std::string model_name(FitModel m) { return m == FitModel::Exponential ? "exponential" : "cosine"; }

FitResult fit_exponential(const std::vector<double>& t, const std::vector<double>& y, const FitOptions& opt) {
  check_series(t, y, 3);
  for (double v : y) {
    if (!(v > 0.0)) throw NumericalError("exponential fit needs strictly positive values");
  }
  FitResult r;
  r.model = FitModel::Exponential;
  std::vector<double> ly(y.size());
  std::transform(y.begin(), y.end(), ly.begin(), [](double v) { return std::log(v); });

  const Line seed = regress(t, ly);
  if (std::abs(seed.slope) < 1e-12) {
    r.degenerate = true;
    r.tau = r.tau_seed = INFINITY;
    r.params = {std::exp(seed.intercept), INFINITY};
    r.window_end = t.back();
    r.message = "zero growth rate";
    return r;
  }
  r.tau_seed = 1.0 / seed.slope;
  r.window_end = std::min(t.back(), t.front() + opt.window_taus * std::abs(r.tau_seed));
  const std::size_t n = window_size(t, r.window_end, 3);
  r.window_end = t[n - 1];
  const Line local = regress({t.begin(), t.begin() + static_cast<long>(n)},
                             {ly.begin(), ly.begin() + static_cast<long>(n)});

  VectorXd p(2);
  p << std::exp(local.intercept), local.slope;
  const auto [status, iters] = refine<ExpModel>(p, t, y, n, opt);
  r.iterations = iters;
  r.converged = lm_converged(status);
  r.rms = rms_of<ExpModel>(p, t, y, n);
  if (std::abs(p[1]) < 1e-12) {
    r.degenerate = true;
    r.converged = false;
    r.message = "zero growth rate";
  }
  r.tau = 1.0 / p[1];
  r.params = {p[0], r.tau};
  if (!r.converged && r.message.empty()) r.message = "Levenberg-Marquardt did not converge";
  return r;
}

FitResult fit_cosine(const std::vector<double>& t, const std::vector<double>& y, const FitOptions& opt) {
  check_series(t, y, 8);
  FitResult r;
  r.model = FitModel::Cosine;
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  std::vector<double> yc(y.size());
  double var = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    yc[i] = y[i] - mean;
    var += yc[i] * yc[i];
  }
  var /= static_cast<double>(y.size());
  if (std::sqrt(var) <= 1e-12 * std::max(1.0, std::abs(mean))) {
    r.degenerate = true;
    r.tau = r.tau_seed = INFINITY;
    r.params = {0.0, INFINITY, 0.0, mean};
    r.window_end = t.back();
    r.message = "constant series";
    return r;
  }

  // Dominant Fourier peak on the natural grid, then golden-section refinement.
  const double span = (t.back() - t.front()) * static_cast<double>(t.size()) / static_cast<double>(t.size() - 1);
  const double dw = 2.0 * std::numbers::pi / span;
  const std::size_t kmax = t.size() / 2;
  std::vector<double> power(kmax + 1, 0.0);
  std::size_t best = 1;
  for (std::size_t k = 1; k <= kmax; ++k) {
    power[k] = periodogram(t, yc, dw * static_cast<double>(k));
    if (power[k] > power[best]) best = k;
  }
  std::vector<double> sorted(power.begin() + 1, power.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(sorted.size() / 2), sorted.end());
  // White-noise ordinates are exponential: mean = median / ln 2, and the largest of K
  // exceeds mean * (ln K + 7) with probability below 1e-3.
  const double noise_mean = sorted[sorted.size() / 2] / std::numbers::ln2;
  const double floor = noise_mean * (std::log(static_cast<double>(kmax)) + 7.0);
  if (power[best] <= floor) throw NumericalError("no spectral peak above the noise floor");
  double lo = dw * (static_cast<double>(best) - 1.0), hi = dw * (static_cast<double>(best) + 1.0);
  lo = std::max(lo, 0.5 * dw);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
  double fa = periodogram(t, yc, a), fb = periodogram(t, yc, b);
  for (int it = 0; it < 80 && hi - lo > 1e-12 * hi; ++it) {
    if (fa > fb) {
      hi = b; b = a; fb = fa; a = hi - phi * (hi - lo); fa = periodogram(t, yc, a);
    } else {
      lo = a; a = b; fa = fb; b = lo + phi * (hi - lo); fb = periodogram(t, yc, b);
    }
  }
  const double w0 = 0.5 * (lo + hi);
  r.tau_seed = 1.0 / w0;
  r.window_end = std::min(t.back(), t.front() + opt.window_periods * 2.0 * std::numbers::pi / w0);
  const std::size_t n = window_size(t, r.window_end, 8);
  r.window_end = t[n - 1];

  // Amplitude, phase and offset by linear least squares at fixed frequency.
  MatrixXd design(n, 3);
  VectorXd rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    design.row(static_cast<Eigen::Index>(i)) << std::cos(w0 * t[i]), std::sin(w0 * t[i]), 1.0;
    rhs[static_cast<Eigen::Index>(i)] = y[i];
  }
  const VectorXd c = design.colPivHouseholderQr().solve(rhs);
  VectorXd p(4);
  p << std::hypot(c[0], c[1]), w0, std::atan2(-c[1], c[0]), c[2];

  const auto [status, iters] = refine<CosModel>(p, t, y, n, opt);
  r.iterations = iters;
  r.converged = lm_converged(status);
  r.rms = rms_of<CosModel>(p, t, y, n);
  if (p[0] < 0) {
    p[0] = -p[0];
    p[2] += std::numbers::pi;
  }
  if (p[1] < 0) {
    p[1] = -p[1];
    p[2] = -p[2];
  }
  p[2] = std::remainder(p[2], 2.0 * std::numbers::pi);
  if (std::abs(p[1]) < 1e-12) {
    r.degenerate = true;
    r.converged = false;
    r.message = "zero frequency";
  }
  r.tau = 1.0 / p[1];
  r.params = {p[0], r.tau, p[2], p[3]};
  if (!r.converged && r.message.empty()) r.message = "Levenberg-Marquardt did not converge";
  return r;
}

ScalingFit scaling_exponent(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 4) throw UsageError("scaling fit needs at least 4 points");
  std::vector<double> x, y;
  for (const auto& [d, tau] : points) {
    if (!(std::abs(d) > 0.0) || !(tau > 0.0) || !std::isfinite(tau)) {
      throw UsageError("scaling fit needs |delta| > 0 and finite tau > 0");
    }
    x.push_back(std::log(std::abs(d)));
    y.push_back(std::log(tau));
  }
  const Line l = regress(x, y);
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double sxx = 0;
  for (double v : x) sxx += (v - mx) * (v - mx);
  return {l.slope, std::sqrt(l.ssr / static_cast<double>(x.size() - 2) / sxx), l.intercept};
}

double sweep_t_max(const SweepConfig& cfg, double delta) {
  if (delta == 0.0) throw UsageError("sweep points need delta != 0");
  const double t = cfg.t_scale * std::sqrt(0.1 / std::abs(delta));
  return delta > 0 ? t : 0.25 * t;
}

std::vector<SweepSeries> run_sweep(const SweepConfig& cfg) {
  if (cfg.deltas.empty()) throw UsageError("sweep needs at least one delta");
  if (cfg.samples < 8) throw UsageError("sweep needs at least 8 samples per point");
  const std::size_t nobs = cfg.observables.size();
  std::vector<OperatorExpr> obs;
  for (const auto& name : cfg.observables) obs.push_back(observable_by_name(name, cfg.params.L));
  std::vector<SweepSeries> out(cfg.deltas.size() * nobs);
  parallel_for(cfg.deltas.size(), [&](std::size_t k) {
    SpinChainParams p = cfg.params;
    p.delta = cfg.deltas[k];
    const double t_max = sweep_t_max(cfg, p.delta);
    std::vector<double> times(static_cast<std::size_t>(cfg.samples));
    for (int i = 0; i < cfg.samples; ++i) times[static_cast<std::size_t>(i)] = t_max * i / (cfg.samples - 1);
    EvolutionConfig ec;
    ec.rel_tol = cfg.rel_tol;
    StateRequest req;
    req.kind = cfg.init;
    const auto traj = evolve_at(build_h_nhs(p), build_state(p.L, req), times, ec);
    for (std::size_t o = 0; o < nobs; ++o) {
      out[k * nobs + o] = {p.delta, expectation_series(obs[o], traj, cfg.observables[o])};
    }
  });
  return out;
}

ScalingRow fit_sweep_point(const SweepSeries& s, const FitOptions& opt) {
  if (s.delta == 0.0) throw UsageError("no timescale model at delta = 0");
  return {s.delta, s.series.label, s.delta > 0 ? fit_cosine(s.series, opt) : fit_exponential(s.series, opt)};
}

}  // namespace epchain

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "epchain/chain.hpp"
#include "epchain/dynamics.hpp"

namespace epchain {

enum class FitModel { Exponential, Cosine };
std::string model_name(FitModel m);

struct FitResult {
  FitModel model = FitModel::Exponential;
  // Exponential: (A, tau) for A e^{t / tau}. Cosine: (B, tau, theta, C) for B cos(t / tau + theta) + C.
  std::vector<double> params;
  double tau = 0.0;
  double tau_seed = 0.0;
  double window_end = 0.0;
  double rms = 0.0;
  bool converged = false;
  bool degenerate = false;
  int iterations = 0;
  std::string message;
};

struct FitOptions {
  double rel_tol = 1e-10;
  int max_iterations = 200;
  double window_taus = 6.0;     // exponential: window in units of the seeded tau
  double window_periods = 6.0;  // cosine: window in seeded periods
};

FitResult fit_exponential(const std::vector<double>& t, const std::vector<double>& y, const FitOptions& opt = {});
FitResult fit_cosine(const std::vector<double>& t, const std::vector<double>& y, const FitOptions& opt = {});
inline FitResult fit_exponential(const TimeSeries& s, const FitOptions& opt = {}) {
  return fit_exponential(s.times, s.real(), opt);
}
inline FitResult fit_cosine(const TimeSeries& s, const FitOptions& opt = {}) {
  return fit_cosine(s.times, s.real(), opt);
}

struct ScalingFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  double intercept = 0.0;
};
// OLS of ln tau on ln |delta|; needs at least 4 points.
ScalingFit scaling_exponent(const std::vector<std::pair<double, double>>& points);

struct SweepConfig {
  SpinChainParams params;  // delta is overwritten per point
  std::vector<double> deltas;
  std::vector<std::string> observables{"C1"};
  double t_scale = 45.0;  // t_max = t_scale sqrt(0.1 / |delta|), quartered for delta < 0
  int samples = 1201;
  double rel_tol = 1e-10;
  std::string init = "uniform";
};

// t_max used for a sweep point.
double sweep_t_max(const SweepConfig& cfg, double delta);

struct SweepSeries {
  double delta;
  TimeSeries series;
};
std::vector<SweepSeries> run_sweep(const SweepConfig& cfg);

struct ScalingRow {
  double delta;
  std::string observable;
  FitResult fit;
};
// Cosine fit for delta > 0, exponential for delta < 0.
ScalingRow fit_sweep_point(const SweepSeries& s, const FitOptions& opt = {});

}  // namespace epchain

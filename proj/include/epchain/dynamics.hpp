#pragma once

#include <string>
#include <utility>
#include <vector>

#include "epchain/dense.hpp"
#include "epchain/operator_expr.hpp"

namespace epchain {

enum class EvolutionMethod { Expm, RkAdaptive };

struct EvolutionConfig {
  double t_max = 30.0;
  double dt_out = 0.1;
  EvolutionMethod method = EvolutionMethod::RkAdaptive;
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double overflow_norm = 1e120;

  void validate() const;
};

// 0, dt_out, 2 dt_out, ... with t_max appended when it is not on the grid.
std::vector<double> output_grid(double t_max, double dt_out);

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
};

struct TimeSeries {
  std::string label;
  std::vector<double> times;
  std::vector<cplx> values;

  std::vector<double> real() const;
};

// exp(-i H t).
DenseOperator propagator(const DenseOperator& h, double t);

// psi(t) = exp(-i H t) psi0 on the configured grid, never renormalized.
Trajectory evolve(const OperatorExpr& h, const StateVector& psi0, const EvolutionConfig& cfg);
Trajectory evolve_at(const OperatorExpr& h, const StateVector& psi0, const std::vector<double>& times,
                     const EvolutionConfig& cfg);

// <psi|O|psi>, or <psi|O|psi> / <psi|psi> when normalized.
TimeSeries expectation_series(const OperatorExpr& o, const Trajectory& traj, const std::string& label,
                              bool normalized = false);

using NamedObservable = std::pair<std::string, OperatorExpr>;

// Same sesquilinear values, with propagation (Taylor series) and evaluation in
// 50-digit arithmetic. For runs where ||psi||^2 outgrows the observable beyond
// what doubles resolve, e.g. the higher COMs at delta < 0.
std::vector<TimeSeries> expectation_series_extended(const OperatorExpr& h, const StateVector& psi0,
                                                    const std::vector<NamedObservable>& observables,
                                                    const std::vector<double>& times, bool normalized = false);

// Sign s in s i <H^dagger m - m H> + <j_i> - <j_{i-1}> = 0, fixed by the symbolic check.
inline constexpr int kContinuitySign = +1;

struct DensityRow {
  double t;
  int site;
  double mx;
  double current;
  double residual;
};

// <m_i^x>(t) for every site; rows indexed [time][site - 1].
std::vector<std::vector<double>> density_profile(const Trajectory& traj);
// Full table with currents and |continuity residual| per site and time.
std::vector<DensityRow> continuity_residual(const OperatorExpr& h, const Trajectory& traj, double J = 1.0);

}  // namespace epchain

#include "epchain/circuit.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "epchain/error.hpp"
#include "epchain/parallel.hpp"

namespace epchain {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

void apply_site(const Eigen::Matrix2cd& g, int L, int site, VectorXcd& v) {
  const Eigen::Index bit = Eigen::Index{1} << (L - site);
  for (Eigen::Index b = 0; b < v.size(); ++b) {
    if (b & bit) continue;
    const cplx up = v[b], down = v[b | bit];
    v[b] = g(0, 0) * up + g(0, 1) * down;
    v[b | bit] = g(1, 0) * up + g(1, 1) * down;
  }
}

MatrixXcd dense_exp(const OperatorExpr& h, double dt) {
  return (cplx(0, -dt) * to_dense(h).matrix()).exp();
}

// Joint system-ancilla register: the ancilla is the slowest index.
struct Register {
  VectorXcd a0, a1;
};

// Ancilla-free gates act on both ancilla components.
void apply_system(const CircuitProgram& prog, const Gate& g, Register& reg) {
  const int L = prog.params.L;
  switch (g.kind) {
    case GateKind::Init:
      reg.a0 = prog.u_init * reg.a0;
      reg.a1 = prog.u_init * reg.a1;
      break;
    case GateKind::Unitary:
      reg.a0 = prog.u_step * reg.a0;
      reg.a1 = prog.u_step * reg.a1;
      break;
    case GateKind::R:
      apply_site(prog.r, L, g.site, reg.a0);
      apply_site(prog.r, L, g.site, reg.a1);
      break;
    case GateKind::RInv:
      apply_site(prog.r.adjoint(), L, g.site, reg.a0);
      apply_site(prog.r.adjoint(), L, g.site, reg.a1);
      break;
    case GateKind::AncillaInit: {
      // The ancilla enters in |0> (fresh or reset after a |0> post-selection).
      const VectorXcd s = reg.a0;
      reg.a0 = prog.ancilla(0, 0) * s;
      reg.a1 = prog.ancilla(1, 0) * s;
      break;
    }
    case GateKind::Cnot: {
      const Eigen::Index bit = Eigen::Index{1} << (L - g.site);
      for (Eigen::Index b = 0; b < reg.a0.size(); ++b) {
        if (b & bit) std::swap(reg.a0[b], reg.a1[b]);
      }
      break;
    }
    case GateKind::Measure:
      break;
  }
}

void check_program(const CircuitProgram& prog) {
  if (prog.params.L < 1 || prog.params.L > kCircuitMaxSites) {
    throw UsageError("circuit simulation supports 1.." + std::to_string(kCircuitMaxSites) + " sites");
  }
}

const Eigen::Matrix2cd& pauli_matrix(int k) {
  static const Eigen::Matrix2cd m[3] = {
      (Eigen::Matrix2cd() << 0, 1, 1, 0).finished(),
      (Eigen::Matrix2cd() << 0, cplx(0, -1), cplx(0, 1), 0).finished(),
      (Eigen::Matrix2cd() << 1, 0, 0, -1).finished(),
  };
  return m[k];
}

}  // namespace

DenseOperator trotter_u(const SpinChainParams& p, double dt, TrotterMode mode) {
  p.validate();
  if (p.L > kDefaultDenseCap) throw UsageError("trotter_u is dense; L capped at 10");
  if (mode == TrotterMode::Auto) mode = p.L <= 3 ? TrotterMode::Exact : TrotterMode::FirstOrder;
  SpinChainParams field_only = p;
  field_only.delta = 1.0;  // H_NHS at delta = 1 is H_XXX + g sum sigma^x
  if (mode == TrotterMode::Exact) return {p.L, dense_exp(build_h_nhs(field_only), dt)};

  const ComplexRational J = ComplexRational::from_double(p.J);
  const ComplexRational g = ComplexRational::from_double(p.g);
  std::vector<MatrixXcd> pieces;
  for (int j = 1; j < p.L; ++j) {
    OperatorExpr bond(p.L);
    for (Pauli a : {Pauli::X, Pauli::Y, Pauli::Z}) {
      std::vector<LocalOp> f(p.L, LocalOp::of(SiteOp::I));
      f[j - 1] = LocalOp::pauli(a);
      f[j] = LocalOp::pauli(a);
      bond += OperatorExpr::tensor(f).scaled(J);
    }
    pieces.push_back(to_dense(bond).matrix());
  }
  OperatorExpr field(p.L);
  for (int j = 1; j <= p.L; ++j) field += OperatorExpr::site(p.L, j, LocalOp::pauli(Pauli::X).scaled(g));
  pieces.push_back(to_dense(field).matrix());

  const Eigen::Index d = Eigen::Index{1} << p.L;
  MatrixXcd u = MatrixXcd::Identity(d, d);
  if (mode == TrotterMode::FirstOrder) {
    for (const auto& h : pieces) u = (cplx(0, -dt) * h).exp() * u;
  } else {
    for (std::size_t k = 0; k + 1 < pieces.size(); ++k) u = (cplx(0, -0.5 * dt) * pieces[k]).exp() * u;
    u = (cplx(0, -dt) * pieces.back()).exp() * u;
    for (std::size_t k = pieces.size() - 1; k-- > 0;) u = (cplx(0, -0.5 * dt) * pieces[k]).exp() * u;
  }
  return {p.L, std::move(u)};
}

Eigen::Matrix2cd rotation_r() {
  const cplx a = std::polar(1.0, std::numbers::pi / 4), b = std::polar(1.0, -std::numbers::pi / 4);
  Eigen::Matrix2cd r = a * Eigen::Matrix2cd::Identity();
  for (int k = 0; k < 3; ++k) r += b * pauli_matrix(k);
  return r / 2.0;
}

Eigen::Matrix2cd ancilla_init(double dtilde) {
  const double a = std::numbers::pi / 4 - dtilde;
  Eigen::Matrix2cd m;
  m << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return m;
}

Eigen::Matrix2cd branch_site_operator(double dtilde) {
  return (std::cos(dtilde) * Eigen::Matrix2cd::Identity() + std::sin(dtilde) * pauli_matrix(1)) /
         std::sqrt(2.0);
}

Eigen::MatrixXcd state_prep_unitary(const StateVector& psi) {
  const double n = psi.norm();
  if (!(n > 0.0)) throw UsageError("cannot prepare the zero state");
  const VectorXcd v = psi.amplitudes() / n;
  const cplx phase = std::abs(v[0]) > 0 ? v[0] / std::abs(v[0]) : cplx(1.0);
  VectorXcd w = -v * std::conj(phase);
  w[0] += 1.0;
  const Eigen::Index d = v.size();
  MatrixXcd u = MatrixXcd::Identity(d, d);
  const double w2 = w.squaredNorm();
  if (w2 > 1e-30) u -= (2.0 / w2) * w * w.adjoint();
  return phase * u;
}

std::string gate_name(GateKind k) {
  switch (k) {
    case GateKind::Init: return "init";
    case GateKind::Unitary: return "U";
    case GateKind::R: return "R";
    case GateKind::RInv: return "R_inv";
    case GateKind::AncillaInit: return "ancilla_init";
    case GateKind::Cnot: return "CNOT";
    case GateKind::Measure: return "measure";
  }
  return "?";
}

CircuitProgram build_protocol(const SpinChainParams& p, int steps, double dt, const StateVector& init,
                              TrotterMode mode) {
  p.validate();
  if (p.L > kCircuitMaxSites) throw UsageError("circuit simulation supports up to 6 sites");
  if (steps < 0) throw UsageError("steps must be non-negative");
  if (!(dt >= 0.0)) throw UsageError("dt must be non-negative");
  if (init.sites() != p.L) throw UsageError("initial state size differs from L");
  CircuitProgram prog;
  prog.params = p;
  prog.steps = steps;
  prog.dt = dt;
  prog.dtilde = p.g * (1.0 - p.delta) * dt;
  prog.u_init = state_prep_unitary(init);
  prog.u_step = trotter_u(p, dt, mode).matrix();
  prog.r = rotation_r();
  prog.ancilla = ancilla_init(prog.dtilde);
  prog.gates.push_back({GateKind::Init, 0, 0});
  for (int k = 1; k <= steps; ++k) {
    prog.gates.push_back({GateKind::Unitary, 0, k});
    for (int j = 1; j <= p.L; ++j) {
      prog.gates.push_back({GateKind::R, j, k});
      prog.gates.push_back({GateKind::AncillaInit, j, k});
      prog.gates.push_back({GateKind::Cnot, j, k});
      prog.gates.push_back({GateKind::Measure, j, k});
      prog.gates.push_back({GateKind::RInv, j, k});
    }
  }
  return prog;
}

Eigen::MatrixXcd branch_step_operator(const CircuitProgram& prog) {
  const int L = prog.params.L;
  MatrixXcd m = prog.u_step;
  const Eigen::Matrix2cd b = branch_site_operator(prog.dtilde);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    VectorXcd col = m.col(c);
    for (int j = 1; j <= L; ++j) apply_site(b, L, j, col);
    m.col(c) = col;
  }
  return m;
}

std::vector<StateVector> run_deterministic(const CircuitProgram& prog) {
  check_program(prog);
  const int L = prog.params.L;
  const Eigen::Index d = Eigen::Index{1} << L;
  Register reg{VectorXcd::Zero(d), VectorXcd::Zero(d)};
  reg.a0[0] = 1.0;
  std::vector<StateVector> out;
  int step = 0;
  for (std::size_t gi = 0; gi < prog.gates.size(); ++gi) {
    const Gate& g = prog.gates[gi];
    if (g.kind == GateKind::Measure) {
      reg.a1.setZero();  // keep the |0>_a branch, unnormalized
    } else {
      apply_system(prog, g, reg);
    }
    const bool step_done = gi + 1 == prog.gates.size() || prog.gates[gi + 1].step != g.step;
    if (step_done) {
      out.emplace_back(L, reg.a0);
      ++step;
    }
  }
  return out;
}

TrajectoryStats run_sampling(const CircuitProgram& prog, std::uint64_t shots, std::uint64_t seed,
                             const SamplingOptions& opt) {
  check_program(prog);
  if (shots < 1) throw UsageError("shots must be >= 1");
  if (!(opt.depolarizing >= 0.0 && opt.depolarizing <= 1.0)) throw UsageError("depolarizing in [0, 1]");
  const int L = prog.params.L;
  const Eigen::Index d = Eigen::Index{1} << L;
  const auto nrec = static_cast<std::size_t>(prog.steps) + 1;
  const Eigen::Index down = static_cast<Eigen::Index>(polarized_index(L));

  struct Counts {
    std::vector<std::uint64_t> accepted, all_down;
  };
  const std::size_t chunks = std::min<std::uint64_t>(shots, 64);
  std::vector<Counts> partial(chunks, Counts{std::vector<std::uint64_t>(nrec, 0), std::vector<std::uint64_t>(nrec, 0)});

  parallel_for(chunks, [&](std::size_t c) {
    Counts& cnt = partial[c];
    for (std::uint64_t shot = c; shot < shots; shot += chunks) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(shot), static_cast<std::uint32_t>(shot >> 32)};
      std::mt19937_64 rng(seq);
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      auto noise = [&](int site, Register& reg) {
        if (opt.depolarizing == 0.0 || unif(rng) >= opt.depolarizing) return;
        const auto k = std::min(2, static_cast<int>(3.0 * unif(rng)));
        apply_site(pauli_matrix(k), L, site, reg.a0);
        apply_site(pauli_matrix(k), L, site, reg.a1);
      };
      Register reg{VectorXcd::Zero(d), VectorXcd::Zero(d)};
      reg.a0[0] = 1.0;
      bool alive = true;
      for (std::size_t gi = 0; gi < prog.gates.size() && alive; ++gi) {
        const Gate& g = prog.gates[gi];
        if (g.kind == GateKind::Measure) {
          const double p0 = reg.a0.squaredNorm(), p1 = reg.a1.squaredNorm();
          if (unif(rng) * (p0 + p1) < p0) {
            reg.a0 /= std::sqrt(p0);
            reg.a1.setZero();
          } else {
            alive = false;
          }
        } else {
          apply_system(prog, g, reg);
          if (g.kind == GateKind::R || g.kind == GateKind::RInv) noise(g.site, reg);
          if (g.kind == GateKind::Unitary) {
            for (int j = 1; j <= L; ++j) noise(j, reg);
          }
        }
        const bool step_done = gi + 1 == prog.gates.size() || prog.gates[gi + 1].step != g.step;
        if (alive && step_done) {
          const auto k = static_cast<std::size_t>(g.step);
          ++cnt.accepted[k];
          // Non-destructive z-basis readout of the surviving trajectory.
          if (unif(rng) * reg.a0.squaredNorm() < std::norm(reg.a0[down])) ++cnt.all_down[k];
        }
      }
    }
  });

  TrajectoryStats s;
  s.seed = seed;
  s.shots = shots;
  s.total.assign(nrec, shots);
  s.accepted.assign(nrec, 0);
  s.all_down.assign(nrec, 0);
  for (const auto& c : partial) {
    for (std::size_t k = 0; k < nrec; ++k) {
      s.accepted[k] += c.accepted[k];
      s.all_down[k] += c.all_down[k];
    }
  }
  return s;
}

double raw_normalization(const CircuitProgram& prog, int k) {
  return std::ldexp(1.0, prog.params.L * k);
}

C1Estimate estimate_c1(const TrajectoryStats& stats, const CircuitProgram& prog, EstimatorMode mode) {
  if (stats.total.size() != static_cast<std::size_t>(prog.steps) + 1) {
    throw UsageError("statistics do not match the program's step count");
  }
  C1Estimate e;
  for (int k = 0; k <= prog.steps; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    double n = 0.0, scale = 1.0;
    if (mode == EstimatorMode::Raw) {
      n = static_cast<double>(stats.total[uk]);
      scale = raw_normalization(prog, k);
    } else {
      n = static_cast<double>(stats.accepted[uk]);
      if (n == 0.0) {
        e.diagnostic = "no accepted trajectories from step " + std::to_string(k) + "; series truncated";
        break;
      }
    }
    const double p = static_cast<double>(stats.all_down[uk]) / n;
    e.times.push_back(k * prog.dt);
    e.values.push_back(scale * p);
    e.stderrs.push_back(scale * std::sqrt(p * (1.0 - p) / n));
    if (mode == EstimatorMode::Raw && stats.accepted[uk] == 0 && e.diagnostic.empty()) {
      e.diagnostic = "no accepted trajectories from step " + std::to_string(k) + "; raw estimate is zero there";
    }
  }
  return e;
}

std::vector<double> deterministic_c1(const CircuitProgram& prog, const std::vector<StateVector>& branches) {
  const Eigen::Index down = static_cast<Eigen::Index>(polarized_index(prog.params.L));
  std::vector<double> out;
  for (std::size_t k = 0; k < branches.size(); ++k) {
    out.push_back(std::norm(branches[k][down]) * raw_normalization(prog, static_cast<int>(k)));
  }
  return out;
}

std::vector<double> exact_c1(const CircuitProgram& prog) {
  const int L = prog.params.L;
  const DenseOperator h = to_dense(build_h_nhs(prog.params));
  const VectorXcd psi0 = prog.u_init.col(0);
  const Eigen::Index down = static_cast<Eigen::Index>(polarized_index(L));
  std::vector<double> out;
  const MatrixXcd step = propagator(h, prog.dt).matrix();
  VectorXcd v = psi0;
  for (int k = 0; k <= prog.steps; ++k) {
    if (k > 0) v = step * v;
    out.push_back(std::norm(v[down]));
  }
  return out;
}

}  // namespace epchain

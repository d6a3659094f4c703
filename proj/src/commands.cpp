#include "epchain/commands.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "epchain/chain.hpp"
#include "epchain/circuit.hpp"
#include "epchain/config.hpp"
#include "epchain/csv.hpp"
#include "epchain/dynamics.hpp"
#include "epchain/error.hpp"
#include "epchain/fitting.hpp"
#include "epchain/jordan.hpp"

namespace epchain {

namespace {

using nlohmann::json;

struct Overrides {
  std::optional<std::string> config;
  std::optional<int> L;
  std::optional<double> J, g, delta, t_max, dt_out, rel_tol;
  std::optional<std::string> obs, init, output;
  std::optional<std::uint64_t> seed, shots;
};

void add_common(CLI::App* sc, Overrides& o) {
  sc->add_option("--config", o.config, "JSON run configuration; flags override it");
  sc->add_option("--L", o.L, "number of sites");
  sc->add_option("--J", o.J, "exchange coupling");
  sc->add_option("--g", o.g, "field strength");
  sc->add_option("--delta", o.delta, "deformation away from the exceptional point");
  sc->add_option("--t-max", o.t_max, "final time");
  sc->add_option("--dt-out", o.dt_out, "output spacing (circuit: Trotter step)");
  sc->add_option("--rel-tol", o.rel_tol, "integrator relative tolerance");
  sc->add_option("--obs", o.obs, "comma-separated observables (C1,C2,C2sum,C3,Sz,norm,mx<i>,j<i>)");
  sc->add_option("--init", o.init, "uniform | polarized | defect:i[:theta[:phi]] | gaussian_defect[:c[:w]]");
  sc->add_option("--seed", o.seed, "64-bit RNG seed");
  sc->add_option("--shots", o.shots, "number of circuit trajectories");
  sc->add_option("--output", o.output, "output path (stdout when omitted)");
}

RunConfig resolve(const Overrides& o, RunConfig base) {
  if (o.config) {
    json j;
    std::ifstream f(*o.config);
    if (!f) throw ConfigError("cannot read config '" + *o.config + "'");
    try {
      j = json::parse(f);
    } catch (const json::exception& e) {
      throw ConfigError("config '" + *o.config + "' is not valid JSON: " + e.what());
    }
    merge_config(base, j);
  }
  if (o.L) base.L = *o.L;
  if (o.J) base.J = *o.J;
  if (o.g) base.g = *o.g;
  if (o.delta) base.delta = *o.delta;
  if (o.t_max) base.t_max = *o.t_max;
  if (o.dt_out) base.dt_out = *o.dt_out;
  if (o.rel_tol) base.rel_tol = *o.rel_tol;
  if (o.obs) base.observables = split_list(*o.obs);
  if (o.init) base.init = parse_init(*o.init);
  if (o.seed) base.seed = *o.seed;
  if (o.shots) base.shots = *o.shots;
  if (o.output) base.output = *o.output;
  validate_config(base);
  return base;
}

std::vector<std::string> provenance(const std::string& command, const RunConfig& cfg, const json& extra) {
  json c = to_json(cfg);
  for (const auto& [k, v] : extra.items()) c[k] = v;
  return {std::string("epchain-version ") + kVersion, "command " + command, "config " + c.dump()};
}

struct Sink {
  std::ostream& out;
  std::ostream& err;
  std::string path;

  // Data goes to the file when a path is set, otherwise to stdout; summaries
  // go wherever the data does not.
  void data(const std::string& text) const {
    if (path.empty()) out << text;
    else write_file_atomic(path, text);
  }
  std::ostream& summary() const { return path.empty() ? err : out; }
};

std::string fmt(double v) { return format_double(v); }

// ---------------------------------------------------------------- coms

int cmd_coms(const RunConfig& cfg, const std::string& which, const std::string& check, bool emit,
             const Sink& sink) {
  if (check != "symbolic" && check != "numeric" && check != "both") throw UsageError("--check must be symbolic|numeric|both");
  std::vector<int> ns;
  if (which == "all") ns = {1, 2, 3};
  else if (which == "1" || which == "2" || which == "3") ns = {std::stoi(which)};
  else throw UsageError("--n must be 1, 2, 3 or all");
  const bool symbolic = check != "numeric", numeric = check != "symbolic";
  if (numeric && cfg.L > kDefaultDenseCap) throw UsageError("numeric checks are dense; L capped at 10");

  const SpinChainParams p = cfg.params();
  const OperatorExpr h = build_h_nhs(p);
  Eigen::MatrixXcd hd;
  if (numeric) hd = to_dense(h).matrix();
  json report{{"command", "coms"}, {"config", to_json(cfg)}, {"coms", json::array()}};
  bool all_zero = true;
  for (int n : ns) {
    const OperatorExpr c = build_com_closed(n, cfg.L);
    json e{{"n", n}, {"source", provenance_name(ComProvenance::ClosedForm)}, {"hermitian", c.is_hermitian()},
           {"terms", c.size()}};
    if (symbolic) {
      const auto r = conservation_residual(h, c);
      e["symbolic_residual_terms"] = r.size();
      e["symbolic_zero"] = r.size() == 0;
      all_zero &= r.size() == 0;
    }
    if (numeric) {
      const double r = com_residual(hd, to_dense(c).matrix());
      e["numeric_residual"] = r;
      all_zero &= r < 1e-10;
    }
    if (emit) e["operator"] = to_json(c);
    report["coms"].push_back(e);
  }
  if (which == "all" && numeric) {
    // Every COM of the exceptional-point chain, built from generalized eigenvectors.
    const auto chain = heisenberg_chain(cfg.L, cfg.J, cfg.g);
    const auto basis = coms_from_chain(chain);
    json arr = json::array();
    for (int n = 1; n <= static_cast<int>(basis.operators.size()); ++n) {
      const auto& m = basis.operators[static_cast<std::size_t>(n - 1)];
      json e{{"n", n}, {"source", provenance_name(basis.provenance)}, {"numeric_residual", com_residual(hd, m)}};
      if (n <= 3) e["closed_form_difference"] = (m - to_dense(build_com_closed(n, cfg.L)).matrix()).norm();
      all_zero &= com_residual(hd, m) < 1e-10;
      arr.push_back(e);
    }
    report["chain_coms"] = arr;
    report["chain_energy"] = chain.E;
  }
  report["all_zero"] = all_zero;
  sink.data(report.dump(2) + "\n");
  return kExitOk;
}

// ---------------------------------------------------------------- evolve

int cmd_evolve(const RunConfig& cfg, const std::string& method, bool normalized, const Sink& sink) {
  EvolutionConfig ec;
  ec.t_max = cfg.t_max;
  ec.dt_out = cfg.dt_out;
  ec.rel_tol = cfg.rel_tol;
  if (method == "expm") ec.method = EvolutionMethod::Expm;
  else if (method != "rk" && method != "extended") throw UsageError("--method must be rk, expm or extended");
  ec.validate();
  const StateVector psi0 = build_state(cfg.L, cfg.init);
  std::vector<NamedObservable> obs;
  for (const auto& name : cfg.observables) obs.emplace_back(name, observable_by_name(name, cfg.L, cfg.J));
  const OperatorExpr h = build_h_nhs(cfg.params());
  std::vector<TimeSeries> series;
  if (method == "extended") {
    series = expectation_series_extended(h, psi0, obs, output_grid(ec.t_max, ec.dt_out), normalized);
  } else {
    const auto traj = evolve(h, psi0, ec);
    for (const auto& [name, o] : obs) series.push_back(expectation_series(o, traj, name, normalized));
  }

  CsvTable t;
  t.comments = provenance("evolve", cfg, {{"method", method}, {"normalized", normalized}});
  t.columns = {"t"};
  for (const auto& [name, o] : obs) {
    t.columns.push_back(name + "_re");
    t.columns.push_back(name + "_im");
  }
  json drift = json::object();
  for (const auto& s : series) {
    double worst = 0.0;
    for (const auto& v : s.values) worst = std::max(worst, std::abs(v - s.values.front()));
    drift[s.label] = worst / std::max(1.0, std::abs(s.values.front()));
  }
  const auto& times = series.front().times;
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::vector<std::string> row{fmt(times[i])};
    for (const auto& s : series) {
      row.push_back(fmt(s.values[i].real()));
      row.push_back(fmt(s.values[i].imag()));
    }
    t.add_row(std::move(row));
  }
  sink.data(render_csv(t));
  sink.summary() << json{{"command", "evolve"}, {"rows", t.rows.size()}, {"relative_drift", drift}}.dump() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- density

int cmd_density(const RunConfig& cfg, const Sink& sink) {
  EvolutionConfig ec;
  ec.t_max = cfg.t_max;
  ec.dt_out = cfg.dt_out;
  ec.rel_tol = cfg.rel_tol;
  const OperatorExpr h = build_h_nhs(cfg.params());
  const auto traj = evolve(h, build_state(cfg.L, cfg.init), ec);
  const auto rows = continuity_residual(h, traj, cfg.J);

  CsvTable t;
  t.comments = provenance("density", cfg, json::object());
  t.columns = {"t", "site", "mx", "current", "residual"};
  double worst = 0.0, lo = INFINITY, hi = -INFINITY, sum = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    t.add_row({fmt(r.t), std::to_string(r.site), fmt(r.mx), fmt(r.current), fmt(r.residual)});
    worst = std::max(worst, r.residual);
    sum += r.mx;
    if (r.site == cfg.L) {
      lo = std::min(lo, sum);
      hi = std::max(hi, sum);
      sum = 0.0;
    }
  }
  sink.data(render_csv(t));
  sink.summary() << json{{"command", "density"}, {"max_residual", worst}, {"sum_mx_min", lo}, {"sum_mx_max", hi}}.dump()
                 << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- sweep / fit-tau

struct SweepOptions {
  std::string deltas = "1e-3:1e-1:log5";
  bool both_signs = false;
  int samples = 1201;
  double t_scale = 45.0;
};

SweepConfig make_sweep(const RunConfig& cfg, const SweepOptions& so) {
  SweepConfig sc;
  sc.params = cfg.params();
  std::vector<double> d = parse_grid(so.deltas);
  if (so.both_signs) {
    const std::size_t n = d.size();
    for (std::size_t i = 0; i < n; ++i) d.push_back(-d[i]);
  }
  sc.deltas = d;
  sc.observables = cfg.observables;
  sc.samples = so.samples;
  sc.t_scale = so.t_scale;
  sc.rel_tol = cfg.rel_tol;
  sc.init = cfg.init.kind;
  if (cfg.init.kind != "uniform" && cfg.init.kind != "polarized") throw UsageError("sweep supports uniform or polarized init");
  return sc;
}

json sweep_extra(const SweepOptions& so) {
  return {{"deltas", so.deltas}, {"both_signs", so.both_signs}, {"samples", so.samples}, {"t_scale", so.t_scale}};
}

CsvTable sweep_table(const RunConfig& cfg, const SweepOptions& so, const std::vector<SweepSeries>& data) {
  CsvTable t;
  t.comments = provenance("sweep", cfg, sweep_extra(so));
  t.columns = {"delta", "observable", "t", "re", "im"};
  for (const auto& s : data) {
    for (std::size_t i = 0; i < s.series.times.size(); ++i) {
      t.add_row({fmt(s.delta), s.series.label, fmt(s.series.times[i]), fmt(s.series.values[i].real()),
                 fmt(s.series.values[i].imag())});
    }
  }
  return t;
}

std::vector<SweepSeries> sweep_from_table(const CsvTable& t) {
  const auto cd = t.column("delta"), co = t.column("observable"), ct = t.column("t"), cr = t.column("re"),
             ci = t.column("im");
  std::vector<SweepSeries> out;
  for (const auto& row : t.rows) {
    const double d = std::stod(row[cd]);
    if (out.empty() || out.back().delta != d || out.back().series.label != row[co]) {
      out.push_back({d, TimeSeries{row[co], {}, {}}});
    }
    out.back().series.times.push_back(std::stod(row[ct]));
    out.back().series.values.emplace_back(std::stod(row[cr]), std::stod(row[ci]));
  }
  return out;
}

int cmd_sweep(const RunConfig& cfg, const SweepOptions& so, const Sink& sink) {
  const auto data = run_sweep(make_sweep(cfg, so));
  const CsvTable t = sweep_table(cfg, so, data);
  sink.data(render_csv(t));
  sink.summary() << json{{"command", "sweep"}, {"series", data.size()}, {"rows", t.rows.size()}}.dump() << "\n";
  return kExitOk;
}

int cmd_fit_tau(const RunConfig& cfg, const SweepOptions& so, const std::string& input, const Sink& sink) {
  const auto data = input.empty() ? run_sweep(make_sweep(cfg, so)) : sweep_from_table(read_csv(input));
  CsvTable t;
  t.comments = provenance("fit-tau", cfg, input.empty() ? sweep_extra(so) : json{{"input", input}});
  t.columns = {"delta", "observable", "model", "tau", "rms", "converged"};
  std::map<std::string, std::map<int, std::vector<std::pair<double, double>>>> branches;
  for (const auto& s : data) {
    const ScalingRow r = fit_sweep_point(s);
    t.add_row({fmt(r.delta), r.observable, model_name(r.fit.model), fmt(r.fit.tau), fmt(r.fit.rms),
               r.fit.converged ? "1" : "0"});
    if (r.fit.converged && !r.fit.degenerate) branches[r.observable][r.delta > 0 ? 1 : -1].emplace_back(r.delta, r.fit.tau);
  }
  json report{{"command", "fit-tau"}, {"fits", t.rows.size()}, {"branches", json::array()}};
  for (const auto& [name, by_sign] : branches) {
    for (const auto& [sign, pts] : by_sign) {
      json b{{"observable", name}, {"sign", sign}, {"points", pts.size()}};
      if (pts.size() >= 4) {
        const ScalingFit f = scaling_exponent(pts);
        b["slope"] = f.slope;
        b["stderr"] = f.stderr_slope;
      }
      double lo = INFINITY, hi = 0.0;
      for (const auto& [d, tau] : pts) {
        const double v = tau * std::sqrt(std::abs(d) * (2.0 - std::abs(d)));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      b["tau_omega_min"] = lo;
      b["tau_omega_max"] = hi;
      report["branches"].push_back(b);
    }
  }
  sink.data(render_csv(t));
  sink.summary() << report.dump() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- block / correspondence

int cmd_block(const RunConfig& cfg, int N, double E, const std::string& obstruction, const Sink& sink) {
  if (N < 1) throw UsageError("--N must be >= 1");
  const BlockSpec spec{N, E, cfg.delta};
  const Eigen::MatrixXcd h0 = deformed_block({N, E, 0.0});
  const auto brute = com_space_bruteforce(h0);
  const auto chain = numeric_jordan_chain(h0, E);
  const auto coms = coms_from_chain(chain);
  json report{{"command", "block"},
              {"N", N},
              {"E", E},
              {"delta", cfg.delta},
              {"bruteforce_dim", brute.operators.size()},
              {"chain_order", chain.order()},
              {"chain_residual", chain_residual(h0, chain)},
              {"max_principal_angle", max_principal_angle(brute.operators, coms.operators)}};
  const Eigen::MatrixXcd s = block_similarity(spec);
  const Eigen::MatrixXcd ha = auxiliary_block(spec);
  report["similarity_residual"] = (s * deformed_block(spec) * s.inverse() - ha).norm() / std::max(1e-300, ha.norm());
  json corr = json::array();
  for (int n = 1; n <= N; ++n) {
    const auto c = block_com_correspondence(spec, n);
    corr.push_back({{"n", n},
                    {"scale_re", c.scale.real()},
                    {"scale_im", c.scale.imag()},
                    {"chain_residual", c.chain_residual},
                    {"scaling_residual", c.scaling_residual},
                    {"boundedness", c.boundedness},
                    {"com_space_angle", containment_angle({c.c_ep}, brute.operators)}});
  }
  report["correspondence"] = corr;
  const auto ob = divergence_obstruction_check(cfg.L, parse_grid(obstruction));
  report["obstruction"] = {{"L", cfg.L},
                           {"auxiliary_com_exact", ob.auxiliary_com_exact},
                           {"ratios", ob.ratios},
                           {"exponents", ob.exponents},
                           {"diverges", ob.diverges},
                           {"ep_residual_nonzero", ob.ep_residual_nonzero},
                           {"passed", ob.passed()}};
  sink.data(report.dump(2) + "\n");
  return kExitOk;
}

int cmd_correspondence(const RunConfig& cfg, const Sink& sink) {
  if (cfg.L > kDefaultDenseCap) throw UsageError("correspondence checks are dense; L capped at 10");
  const auto rep = heisenberg_correspondence_check(cfg.L, cfg.delta, cfg.J);
  const SpinChainParams p = cfg.params();
  const Eigen::VectorXd s = similarity_diagonal(cfg.L, cfg.delta);
  const Eigen::MatrixXcd h = to_dense(build_h_nhs(p)).matrix();
  const Eigen::MatrixXcd ha = to_dense(build_h_ahs(p)).matrix();
  const Eigen::MatrixXcd sim = s.cast<cplx>().asDiagonal() * h * s.cwiseInverse().cast<cplx>().asDiagonal();
  json rows = json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({{"n", r.n},
                    {"eigen_residual", r.eigen_residual},
                    {"eigenvalue", r.eigenvalue},
                    {"eigenvalue_expected", r.eigenvalue_expected},
                    {"scaling_residual", r.scaling_residual},
                    {"commutator_residual", r.commutator_residual}});
  }
  const double sim_res = (sim - ha).norm() / ha.norm();
  sink.data(json{{"command", "correspondence"},
                 {"L", cfg.L},
                 {"delta", cfg.delta},
                 {"similarity_residual", sim_res},
                 {"rows", rows},
                 {"max_residual", std::max(sim_res, rep.max_residual())}}
                .dump(2) +
            "\n");
  return kExitOk;
}

// ---------------------------------------------------------------- circuit

int cmd_circuit(const RunConfig& cfg, std::optional<int> steps_opt, double depolarizing, const std::string& trotter,
                const Sink& sink) {
  TrotterMode mode = TrotterMode::Auto;
  if (trotter == "exact") mode = TrotterMode::Exact;
  else if (trotter == "first") mode = TrotterMode::FirstOrder;
  else if (trotter == "second") mode = TrotterMode::SecondOrder;
  else if (trotter != "auto") throw UsageError("--trotter must be auto|exact|first|second");
  if (cfg.L > kCircuitMaxSites) throw UsageError("circuit simulation supports up to 6 sites");
  const double dt = cfg.dt_out;
  const int steps = steps_opt ? *steps_opt : static_cast<int>(std::lround(cfg.t_max / dt));
  const auto prog = build_protocol(cfg.params(), steps, dt, build_state(cfg.L, cfg.init), mode);
  const auto stats = run_sampling(prog, cfg.shots, cfg.seed, {depolarizing});
  const auto raw = estimate_c1(stats, prog, EstimatorMode::Raw);
  const auto norm = estimate_c1(stats, prog, EstimatorMode::Normalized);
  const auto exact = exact_c1(prog);

  CsvTable t;
  t.comments = provenance("circuit", cfg,
                          {{"steps", steps}, {"dt", dt}, {"trotter", trotter}, {"depolarizing", depolarizing}});
  if (!raw.diagnostic.empty()) t.comments.push_back("note " + raw.diagnostic);
  if (!norm.diagnostic.empty()) t.comments.push_back("note " + norm.diagnostic);
  t.columns = {"step", "t", "total", "accepted", "all_down", "c1_raw", "c1_raw_stderr", "c1_norm", "c1_norm_stderr",
               "c1_exact"};
  for (int k = 0; k <= steps; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const bool has_norm = uk < norm.values.size();
    t.add_row({std::to_string(k), fmt(k * dt), std::to_string(stats.total[uk]), std::to_string(stats.accepted[uk]),
               std::to_string(stats.all_down[uk]), fmt(raw.values[uk]), fmt(raw.stderrs[uk]),
               has_norm ? fmt(norm.values[uk]) : "nan", has_norm ? fmt(norm.stderrs[uk]) : "nan", fmt(exact[uk])});
  }
  sink.data(render_csv(t));
  sink.summary() << json{{"command", "circuit"}, {"steps", steps}, {"final_accepted", stats.accepted.back()}}.dump()
                 << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Non-Hermitian Heisenberg chain toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Overrides o_coms, o_evolve, o_density, o_sweep, o_fit, o_block, o_corr, o_circuit;
  auto* coms = app.add_subcommand("coms", "build COMs and check conservation");
  add_common(coms, o_coms);
  std::string coms_n = "all", coms_check = "both";
  bool coms_emit = false;
  coms->add_option("--n", coms_n, "1 | 2 | 3 | all");
  coms->add_option("--check", coms_check, "symbolic | numeric | both");
  coms->add_flag("--emit-operators", coms_emit, "include exact operator expressions");

  auto* evolve_cmd = app.add_subcommand("evolve", "expectation series under exp(-i H t)");
  add_common(evolve_cmd, o_evolve);
  std::string method = "rk";
  bool normalized = false;
  evolve_cmd->add_option("--method", method, "rk | expm | extended (50-digit Taylor)");
  evolve_cmd->add_flag("--normalized", normalized, "divide by <psi|psi>");

  auto* density = app.add_subcommand("density", "m^x density, currents and continuity residuals");
  add_common(density, o_density);

  SweepOptions so_sweep, so_fit;
  auto add_sweep = [](CLI::App* sc, SweepOptions& so) {
    sc->add_option("--deltas", so.deltas, "comma list or lo:hi:logN / lo:hi:linN");
    sc->add_flag("--both-signs", so.both_signs, "add the negated grid");
    sc->add_option("--samples", so.samples, "samples per series");
    sc->add_option("--t-scale", so.t_scale, "t_max = t_scale sqrt(0.1/|delta|), quartered for delta < 0");
  };
  auto* sweep = app.add_subcommand("sweep", "series over a delta grid");
  add_common(sweep, o_sweep);
  add_sweep(sweep, so_sweep);
  auto* fit = app.add_subcommand("fit-tau", "fit timescales and the scaling exponent");
  add_common(fit, o_fit);
  add_sweep(fit, so_fit);
  std::string fit_input;
  fit->add_option("--input", fit_input, "sweep CSV (runs the sweep when omitted)");

  auto* block = app.add_subcommand("block", "deformed Jordan block reports");
  add_common(block, o_block);
  int block_n = 3;
  double block_e = 0.0;
  std::string obstruction = "1e-1:1e-4:log4";
  block->add_option("--N", block_n, "block size");
  block->add_option("--E", block_e, "block eigenvalue");
  block->add_option("--obstruction-deltas", obstruction, "decreasing delta sequence for the obstruction check");

  auto* corr = app.add_subcommand("correspondence", "similarity and COM correspondence checks");
  add_common(corr, o_corr);

  auto* circuit = app.add_subcommand("circuit", "post-selected circuit simulation");
  add_common(circuit, o_circuit);
  std::optional<int> steps;
  double depolarizing = 0.0;
  std::string trotter = "auto";
  circuit->add_option("--steps", steps, "number of steps (default t_max / dt_out)");
  circuit->add_option("--depolarizing", depolarizing, "per-gate Pauli error probability");
  circuit->add_option("--trotter", trotter, "auto | exact | first | second");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    auto sink = [&](const RunConfig& cfg) { return Sink{out, err, cfg.output}; };
    if (coms->parsed()) {
      const auto cfg = resolve(o_coms, {});
      return cmd_coms(cfg, coms_n, coms_check, coms_emit, sink(cfg));
    }
    if (evolve_cmd->parsed()) {
      const auto cfg = resolve(o_evolve, {});
      return cmd_evolve(cfg, method, normalized, sink(cfg));
    }
    if (density->parsed()) {
      const auto cfg = resolve(o_density, {});
      return cmd_density(cfg, sink(cfg));
    }
    if (sweep->parsed()) {
      RunConfig base;
      base.observables = {"C1"};
      const auto cfg = resolve(o_sweep, base);
      return cmd_sweep(cfg, so_sweep, sink(cfg));
    }
    if (fit->parsed()) {
      RunConfig base;
      base.observables = {"C1"};
      const auto cfg = resolve(o_fit, base);
      return cmd_fit_tau(cfg, so_fit, fit_input, sink(cfg));
    }
    if (block->parsed()) {
      RunConfig base;
      base.L = 2;
      base.delta = 0.5;
      const auto cfg = resolve(o_block, base);
      return cmd_block(cfg, block_n, block_e, obstruction, sink(cfg));
    }
    if (corr->parsed()) {
      RunConfig base;
      base.delta = 0.5;
      const auto cfg = resolve(o_corr, base);
      return cmd_correspondence(cfg, sink(cfg));
    }
    if (circuit->parsed()) {
      RunConfig base;
      base.L = 2;
      base.t_max = 3.0;
      const auto cfg = resolve(o_circuit, base);
      return cmd_circuit(cfg, steps, depolarizing, trotter, sink(cfg));
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace epchain

#include "app.hpp"

#include "cdii/calibration.hpp"
#include "cdii/config.hpp"
#include "cdii/csv.hpp"
#include "cdii/metrics.hpp"
#include "cdii/phantom.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>

namespace cdii::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir;
  std::string in_dir;
  std::optional<std::int64_t> seed;
  bool quiet = false;
  std::string reference;
  std::string candidate;
};

/// Mesh, electrodes and currents from a config. Not movable: the forward
/// solver keeps references into it.
struct Problem {
  explicit Problem(const PipelineConfig& cfg);
  Problem(const Problem&) = delete;
  Problem& operator=(const Problem&) = delete;

  Mesh mesh;
  ElectrodeSetup setup;
  CurrentPattern currents;

 private:
  static ElectrodeSetup make_setup(const Mesh& mesh, const PipelineConfig& cfg);
};

Problem::Problem(const PipelineConfig& cfg)
    : mesh(build_uniform_mesh(cfg.side_nodes)),
      setup(make_setup(mesh, cfg)),
      currents(Eigen::Map<const Eigen::VectorXd>(cfg.currents.data(),
                                                 static_cast<Index>(cfg.currents.size()))) {}

ElectrodeSetup Problem::make_setup(const Mesh& mesh, const PipelineConfig& cfg) {
  std::vector<ElectrodeSpan> spans;
  std::vector<double> z;
  for (const auto& e : cfg.electrodes) {
    spans.push_back({e.side, e.lo, e.hi});
    z.push_back(e.z);
  }
  try {
    return locate_electrodes(mesh, spans, z);
  } catch (const ElectrodeSpanError& err) {
    throw ConfigError("electrodes[" + std::to_string(err.electrode()) + "]." + err.field(),
                      err.what());
  }
}

class Session {
 public:
  Session(PipelineConfig cfg, const Options& opts, std::ostream& out, std::ostream& err)
      : cfg_(std::move(cfg)),
        out_dir_(opts.out_dir.empty() ? fs::path(cfg_.output_dir) : fs::path(opts.out_dir)),
        in_dir_(opts.in_dir.empty() ? out_dir_ : fs::path(opts.in_dir)),
        quiet_(opts.quiet),
        out_(out),
        err_(err) {
    if (opts.seed) cfg_.noise_seed = static_cast<std::uint64_t>(*opts.seed);
    fs::create_directories(out_dir_);
  }

  int forward();
  int simulate();
  int reconstruct();
  int calibrate();
  int pipeline();

 private:
  struct Simulation {
    ConductivityField sigma_true;
    InteriorData a;
    BoundaryVoltageTrace trace;
  };

  Simulation run_simulation(const Problem& p);
  ReconstructionResult run_reconstruction(const Problem& p, const InteriorData& a);
  ConductivityField run_calibration(const Problem& p, const ReconstructionResult& recon,
                                    const BoundaryVoltageTrace& trace);
  ConductivityField phantom(const Problem& p) const;

  void write(const std::string& name, const std::string& quantity, const std::string& unit,
             const std::string& entity, const Eigen::MatrixXd& values) const {
    write_field_file(out_dir_ / name, {quantity, unit, entity}, values);
  }
  std::ofstream open(const std::string& name) const {
    std::ofstream f(out_dir_ / name);
    if (!f) throw std::runtime_error("cannot write " + (out_dir_ / name).string());
    return f;
  }
  void note(const std::string& msg) const {
    if (!quiet_) out_ << msg << '\n';
  }

  PipelineConfig cfg_;
  fs::path out_dir_;
  fs::path in_dir_;
  bool quiet_;
  std::ostream& out_;
  std::ostream& err_;
};

ConductivityField Session::phantom(const Problem& p) const {
  return gaussian_phantom(p.mesh, cfg_.phantom.center, cfg_.phantom.amplitude, cfg_.phantom.width);
}

int Session::forward() {
  Problem p(cfg_);
  const ConductivityField sigma = phantom(p);
  const ForwardSolution sol = solve_forward(p.mesh, sigma, p.setup, p.currents, cfg_.recon.solver_tol);
  const InteriorCurrent current = interior_current(p.mesh, sigma, sol);
  write("u.csv", "u", "V", "node", sol.u);
  write("U.csv", "U", "V", "electrode", sol.U);
  write("J.csv", "J", "A/m^2", "triangle", current.J);
  write("a.csv", "a", "A/m^2", "triangle", current.a);
  const MaxPrincipleReport mp = check_max_principle(p.mesh, p.setup, sol.u);
  if (!mp.holds && !quiet_) {
    err_ << "warning: discrete maximum principle violated (non-electrode range [" << mp.other_min
         << ", " << mp.other_max << "], electrode range [" << mp.electrode_min << ", "
         << mp.electrode_max << "])\n";
  }
  note("forward: wrote u.csv, U.csv, J.csv, a.csv to " + out_dir_.string());
  return kOk;
}

Session::Simulation Session::run_simulation(const Problem& p) {
  ConductivityField sigma_true = phantom(p);
  write("sigma_true.csv", "sigma_true", "S/m", "triangle", sigma_true.values());
  SimulatedData sim =
      simulate_data(p.mesh, sigma_true, p.setup, p.currents, cfg_.gamma_side, cfg_.recon.solver_tol);
  InteriorData a = add_noise(sim.a, cfg_.noise_level, cfg_.noise_seed);
  write("a.csv", "a", "A/m^2", "triangle", a.values());
  {
    auto f = open("trace.csv");
    write_trace_csv(f, sim.trace);
  }
  // sim.truth is dropped here; nothing downstream may see the generating solution.
  return Simulation{std::move(sigma_true), std::move(a), std::move(sim.trace)};
}

ReconstructionResult Session::run_reconstruction(const Problem& p, const InteriorData& a) {
  ReconstructionResult recon = cdii::reconstruct(p.mesh, a, p.setup, p.currents, cfg_.recon);
  write("sigma_v.csv", "sigma_v", "S/m", "triangle", recon.sigma_v.values());
  write("v.csv", "v", "V", "node", recon.v.u);
  write("V.csv", "V", "V", "electrode", recon.v.U);
  {
    auto f = open("convergence.csv");
    write_convergence_csv(f, recon.log);
  }
  note(std::string("reconstruct: ") + (recon.converged ? "converged" : "did not converge") +
       " after " + std::to_string(recon.iterations) + " iterations");
  return recon;
}

ConductivityField Session::run_calibration(const Problem& p, const ReconstructionResult& recon,
                                           const BoundaryVoltageTrace& trace) {
  validate_gamma(p.mesh, p.setup, trace);
  const auto pairs = collect_pairs(p.mesh, p.setup, recon, trace);
  const PhiMap phi = build_monotone_map(pairs);
  if (phi.repaired() && !quiet_) {
    err_ << "warning: calibration map repaired for monotonicity (max shift "
         << phi.max_repair_shift() << ")\n";
  }
  {
    auto f = open("phi.csv");
    write_phi_csv(f, phi);
  }
  ConductivityField sigma_final = apply_calibration(p.mesh, recon, phi);
  write("sigma_final.csv", "sigma_final", "S/m", "triangle", sigma_final.values());
  return sigma_final;
}

int Session::simulate() {
  Problem p(cfg_);
  run_simulation(p);
  note("simulate: wrote sigma_true.csv, a.csv, trace.csv to " + out_dir_.string());
  return kOk;
}

int Session::reconstruct() {
  Problem p(cfg_);
  InteriorData a(read_scalar_field(in_dir_ / "a.csv", "triangle"));
  const ReconstructionResult recon = run_reconstruction(p, a);
  return recon.converged ? kOk : kNotConverged;
}

int Session::calibrate() {
  Problem p(cfg_);
  ForwardSolution v;
  v.u = read_scalar_field(in_dir_ / "v.csv", "node");
  v.U = read_scalar_field(in_dir_ / "V.csv", "electrode");
  v.grad_u = triangle_gradients(p.mesh, v.u);
  ReconstructionResult recon{ConductivityField(read_scalar_field(in_dir_ / "sigma_v.csv", "triangle")),
                             std::move(v), {}, true, 0};
  std::ifstream tf(in_dir_ / "trace.csv");
  if (!tf) throw std::runtime_error("cannot read " + (in_dir_ / "trace.csv").string());
  const BoundaryVoltageTrace trace = read_trace_csv(tf, cfg_.gamma_side);
  run_calibration(p, recon, trace);
  note("calibrate: wrote phi.csv, sigma_final.csv to " + out_dir_.string());
  return kOk;
}

void write_metrics(std::ostream& f, const FieldMetrics& m) {
  f << "metric,value\n"
    << "relative_l2," << format_double(m.relative_l2) << '\n'
    << "absolute_l2," << format_double(m.absolute_l2) << '\n'
    << "max_error," << format_double(m.max_error) << '\n';
}

int Session::pipeline() {
  Problem p(cfg_);
  const Simulation sim = run_simulation(p);
  const ReconstructionResult recon = run_reconstruction(p, sim.a);
  const ConductivityField sigma_final = run_calibration(p, recon, sim.trace);
  const FieldMetrics m = compare_fields(p.mesh, sim.sigma_true.values(), sigma_final.values());
  {
    auto f = open("metrics.csv");
    write_metrics(f, m);
    f << "iterations," << recon.iterations << '\n'
      << "converged," << (recon.converged ? "true" : "false") << '\n';
  }
  note("pipeline: relative L2 error " + format_double(m.relative_l2));
  return recon.converged ? kOk : kNotConverged;
}

int run_metrics(const Options& opts, std::ostream& out) {
  if (opts.reference.empty() || opts.candidate.empty()) {
    throw ConfigError("--reference/--candidate", "both fields are required");
  }
  const Eigen::VectorXd ref = read_scalar_field(opts.reference, "triangle");
  const Eigen::VectorXd cand = read_scalar_field(opts.candidate, "triangle");
  if (ref.size() != cand.size()) {
    throw ConfigError("--candidate", "triangle count " + std::to_string(cand.size()) +
                                         " does not match reference " + std::to_string(ref.size()));
  }
  const FieldMetrics m = compare_uniform_fields(ref, cand);
  const fs::path dir = opts.out_dir.empty() ? fs::path(".") : fs::path(opts.out_dir);
  fs::create_directories(dir);
  std::ofstream f(dir / "metrics.csv");
  if (!f) throw std::runtime_error("cannot write " + (dir / "metrics.csv").string());
  write_metrics(f, m);
  if (!opts.quiet) write_metrics(out, m);
  return kOk;
}

void apply_thread_cap() {
  const char* env = std::getenv("CDII_THREADS");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 0) throw ConfigError("CDII_THREADS", "expected a non-negative integer");
  if (n > 0) Eigen::setNbThreads(static_cast<int>(n));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Current density impedance imaging: forward solver, reconstruction and calibration"};
  app.name("cdii");
  app.require_subcommand(1);
  Options opts;

  auto add_common = [&opts](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", opts.config_path, "key=value configuration file");
    if (needs_config) c->required();
    sub->add_option("--out", opts.out_dir, "output directory (overrides output.dir)");
    sub->add_option("--seed", opts.seed, "noise seed (overrides noise.seed)");
    sub->add_flag("--quiet", opts.quiet, "suppress progress messages and warnings");
  };
  auto* forward = app.add_subcommand("forward", "solve the forward problem for the phantom");
  auto* simulate = app.add_subcommand("simulate", "write sigma_true, interior data and trace");
  auto* reconstruct = app.add_subcommand("reconstruct", "run the fixed-point reconstruction on a.csv");
  auto* calibrate = app.add_subcommand("calibrate", "rescale sigma_v with the boundary trace");
  auto* pipeline = app.add_subcommand("pipeline", "simulate, reconstruct, calibrate, score");
  auto* metrics = app.add_subcommand("metrics", "compare two per-triangle fields");
  for (auto* sub : {forward, simulate, reconstruct, calibrate, pipeline}) add_common(sub, true);
  for (auto* sub : {reconstruct, calibrate}) {
    sub->add_option("--in", opts.in_dir, "directory holding the inputs (default: --out)");
  }
  add_common(metrics, false);
  metrics->add_option("--reference", opts.reference, "reference field CSV")->required();
  metrics->add_option("--candidate", opts.candidate, "candidate field CSV")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    apply_thread_cap();
    if (metrics->parsed()) return run_metrics(opts, out);
    Session session(load_config(opts.config_path), opts, out, err);
    if (forward->parsed()) return session.forward();
    if (simulate->parsed()) return session.simulate();
    if (reconstruct->parsed()) return session.reconstruct();
    if (calibrate->parsed()) return session.calibrate();
    return session.pipeline();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return kSolverError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace cdii::cli

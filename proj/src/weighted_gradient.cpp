#include "cdii/weighted_gradient.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace cdii {

InteriorData::InteriorData(Eigen::VectorXd a) : a_(std::move(a)) {
  if (a_.size() == 0) throw std::invalid_argument("interior data is empty");
  for (Index t = 0; t < a_.size(); ++t) {
    if (!(a_[t] >= 0.0) || !std::isfinite(a_[t])) {
      throw std::invalid_argument("interior data must be non-negative (triangle " +
                                  std::to_string(t) + ")");
    }
  }
}

void ReconstructionConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0,1)");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  if (!(solver_tol > 0.0)) throw std::invalid_argument("solver_tol must be positive");
}

namespace {

double electrode_penalty(const Mesh& mesh, const ElectrodeSetup& setup, const Candidate& c) {
  double value = 0.0;
  for (Index k = 0; k < setup.size(); ++k) {
    const Electrode& e = setup[k];
    double integral = 0.0;
    for (Index edge : e.edges) {
      const auto& be = mesh.boundary_edges()[static_cast<std::size_t>(edge)];
      integral += edge_quadrature::square(mesh.h(), c.u[be.nodes[0]] - c.U[k],
                                          c.u[be.nodes[1]] - c.U[k]);
    }
    value += 0.5 * integral / e.z;
  }
  return value;
}

}  // namespace

double evaluate_G_a(const Mesh& mesh, const InteriorData& data, const ElectrodeSetup& setup,
                    const CurrentPattern& currents, const Candidate& candidate) {
  if (data.size() != mesh.triangle_count() || candidate.u.size() != mesh.node_count() ||
      candidate.U.size() != setup.size() || currents.size() != setup.size()) {
    throw std::invalid_argument("evaluate_G_a: dimension mismatch");
  }
  const double vmax = candidate.U.cwiseAbs().maxCoeff();
  if (std::abs(candidate.U.sum()) > 1e-10 * vmax + 1e-300) {
    throw std::invalid_argument("evaluate_G_a: electrode voltages must sum to zero");
  }
  const VectorField grad = triangle_gradients(mesh, candidate.u);
  double value = 0.0;
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    value += data[t] * grad.row(t).norm() * mesh.area(t);
  }
  value += electrode_penalty(mesh, setup, candidate);
  value -= currents.values().dot(candidate.U);
  return value;
}

double min_value_formula(const Mesh& mesh, const ElectrodeSetup& setup,
                         const ForwardSolution& solution) {
  if (solution.u.size() != mesh.node_count() || solution.U.size() != setup.size()) {
    throw std::invalid_argument("min_value_formula: dimension mismatch");
  }
  return -electrode_penalty(mesh, setup, solution);
}

ConductivityField clamp_conductivity(const InteriorData& data, const VectorField& grad,
                                     double epsilon) {
  if (grad.rows() != data.size()) {
    throw std::invalid_argument("clamp_conductivity: dimension mismatch");
  }
  Eigen::VectorXd sigma(data.size());
  const double upper = 1.0 / epsilon;
  for (Index t = 0; t < data.size(); ++t) {
    const double g = grad.row(t).norm();
    sigma[t] = g < kGradientFloor ? upper : std::min(std::max(data[t] / g, epsilon), upper);
  }
  return ConductivityField(std::move(sigma));
}

double max_gradient_difference(const VectorField& grad_n, const VectorField& grad_prev) {
  if (grad_n.rows() != grad_prev.rows()) {
    throw std::invalid_argument("gradient fields differ in length");
  }
  return (grad_n - grad_prev).rowwise().norm().maxCoeff();
}

StopDecision stopping_check(const VectorField& grad_n, const VectorField& grad_prev, double delta,
                            double epsilon, double essinf_a) {
  if (!(essinf_a > 0.0)) throw std::invalid_argument("stopping_check: essinf a must be positive");
  const double diff = max_gradient_difference(grad_n, grad_prev);
  return diff <= delta * epsilon / essinf_a ? StopDecision::stop : StopDecision::proceed;
}

ReconstructionResult reconstruct(const Mesh& mesh, const InteriorData& data,
                                 const ElectrodeSetup& setup, const CurrentPattern& currents,
                                 const ReconstructionConfig& config) {
  config.validate();
  if (data.size() != mesh.triangle_count()) {
    throw std::invalid_argument("reconstruct: interior data does not match the mesh");
  }
  const double essinf = data.essinf();
  if (!(essinf > 0.0)) {
    throw std::invalid_argument("reconstruct: interior data must be bounded away from zero");
  }

  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(clock::now() - start).count();
  };

  ForwardSolver solver(mesh, setup, currents, config.solver_tol);
  auto solve_at = [&](const ConductivityField& sigma, int iteration) {
    try {
      return solver.solve(sigma);
    } catch (const SolverError& err) {
      throw SolverError("iteration " + std::to_string(iteration) + ": " + err.what());
    }
  };

  ForwardSolution current = solve_at(ConductivityField::constant(mesh, 1.0), 0);
  std::vector<IterationRecord> log;
  log.push_back({0, evaluate_G_a(mesh, data, setup, currents, current),
                 std::numeric_limits<double>::quiet_NaN(), elapsed_ms()});

  bool converged = false;
  int n = 0;
  while (n < config.max_iter) {
    ++n;
    const ConductivityField sigma = clamp_conductivity(data, current.grad_u, config.epsilon);
    ForwardSolution next = solve_at(sigma, n);
    const double diff = max_gradient_difference(next.grad_u, current.grad_u);
    log.push_back({n, evaluate_G_a(mesh, data, setup, currents, next), diff, elapsed_ms()});
    const StopDecision decision =
        stopping_check(next.grad_u, current.grad_u, config.delta, config.epsilon, essinf);
    current = std::move(next);
    if (decision == StopDecision::stop) {
      converged = true;
      break;
    }
  }

  ConductivityField sigma_v = clamp_conductivity(data, current.grad_u, config.epsilon);
  return ReconstructionResult{std::move(sigma_v), std::move(current), std::move(log), converged, n};
}

}  // namespace cdii

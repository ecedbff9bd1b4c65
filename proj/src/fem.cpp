#include "cdii/fem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace cdii {

ConductivityField::ConductivityField(Eigen::VectorXd values) : values_(std::move(values)) {
  for (Index t = 0; t < values_.size(); ++t) {
    if (!(values_[t] > 0.0) || !std::isfinite(values_[t])) {
      throw std::invalid_argument("conductivity must be positive and finite (triangle " +
                                  std::to_string(t) + ")");
    }
  }
}

ConductivityField ConductivityField::constant(const Mesh& mesh, double value) {
  return ConductivityField(Eigen::VectorXd::Constant(mesh.triangle_count(), value));
}

CurrentPattern::CurrentPattern(Eigen::VectorXd currents) : values_(std::move(currents)) {
  if (values_.size() < 2) throw std::invalid_argument("current pattern needs at least two entries");
  if (!values_.allFinite()) throw std::invalid_argument("current pattern has non-finite entries");
  const double scale = values_.cwiseAbs().maxCoeff();
  if (std::abs(values_.sum()) > 1e-12 * scale) {
    throw std::invalid_argument("currents must sum to zero (sum = " + std::to_string(values_.sum()) +
                                ")");
  }
}

Eigen::SparseMatrix<double> BlockSystem::full() const {
  const Index m = Lambda.rows();
  const Index n = Upsilon.rows();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(Lambda.nonZeros() + 2 * m * n + n * n));
  for (Index c = 0; c < Lambda.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(Lambda, c); it; ++it) {
      trips.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (Index k = 0; k < n; ++k) {
    for (Index i = 0; i < m; ++i) {
      if (Psi(i, k) != 0.0) {
        trips.emplace_back(i, m + k, Psi(i, k));
        trips.emplace_back(m + k, i, Psi(i, k));
      }
    }
    for (Index l = 0; l < n; ++l) trips.emplace_back(m + k, m + l, Upsilon(k, l));
  }
  Eigen::SparseMatrix<double> A(m + n, m + n);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

VectorField triangle_gradients(const Mesh& mesh, const Eigen::VectorXd& nodal) {
  if (nodal.size() != mesh.node_count()) {
    throw std::invalid_argument("triangle_gradients: nodal field has wrong length");
  }
  VectorField grad(mesh.triangle_count(), 2);
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    const auto tri = mesh.triangles().row(t);
    const Eigen::Vector3d vals(nodal[tri(0)], nodal[tri(1)], nodal[tri(2)]);
    grad.row(t) = vals.transpose() * mesh.gradients(t);
  }
  return grad;
}

namespace {

void check_consistent(const Mesh& mesh, const ConductivityField& sigma,
                      const ElectrodeSetup& setup, const CurrentPattern& currents) {
  if (sigma.size() != mesh.triangle_count()) {
    throw std::invalid_argument("conductivity has " + std::to_string(sigma.size()) +
                                " entries, mesh has " + std::to_string(mesh.triangle_count()) +
                                " triangles");
  }
  if (currents.size() != setup.size()) {
    throw std::invalid_argument("current pattern has " + std::to_string(currents.size()) +
                                " entries for " + std::to_string(setup.size()) + " electrodes");
  }
  const auto edge_count = static_cast<Index>(mesh.boundary_edges().size());
  for (const auto& e : setup.electrodes()) {
    for (Index b : e.edges) {
      if (b < 0 || b >= edge_count) throw std::invalid_argument("electrode edge outside mesh");
    }
  }
}

void check_candidate(const Mesh& mesh, const ElectrodeSetup& setup, const Candidate& c) {
  if (c.u.size() != mesh.node_count() || c.U.size() != setup.size()) {
    throw std::invalid_argument("candidate dimensions do not match mesh/electrodes");
  }
}

/// b_k(i) = int_{e_k} psi_i ds, as a dense vector over nodes.
Eigen::VectorXd electrode_load(const Mesh& mesh, const Electrode& e) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.node_count());
  const double h = mesh.h();
  for (Index edge : e.edges) {
    const auto& be = mesh.boundary_edges()[static_cast<std::size_t>(edge)];
    b[be.nodes[0]] += 0.5 * h;
    b[be.nodes[1]] += 0.5 * h;
  }
  return b;
}

}  // namespace

BlockSystem assemble_system(const Mesh& mesh, const ConductivityField& sigma,
                            const ElectrodeSetup& setup, const CurrentPattern& currents) {
  check_consistent(mesh, sigma, setup, currents);
  const Index m = mesh.node_count();
  const Index last = setup.size() - 1;  // index N of the eliminated voltage
  const double h = mesh.h();

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(9 * mesh.triangle_count()));
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    const LocalGradients& g = mesh.gradients(t);
    const Eigen::Matrix3d local = sigma[t] * mesh.area(t) * (g * g.transpose());
    const auto tri = mesh.triangles().row(t);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) trips.emplace_back(tri(a), tri(b), local(a, b));
    }
  }
  for (const auto& e : setup.electrodes()) {
    const double w = h / (6.0 * e.z);
    for (Index edge : e.edges) {
      const auto& be = mesh.boundary_edges()[static_cast<std::size_t>(edge)];
      const Index p = be.nodes[0], q = be.nodes[1];
      trips.emplace_back(p, p, 2.0 * w);
      trips.emplace_back(q, q, 2.0 * w);
      trips.emplace_back(p, q, w);
      trips.emplace_back(q, p, w);
    }
  }

  BlockSystem sys;
  sys.Lambda.resize(m, m);
  sys.Lambda.setFromTriplets(trips.begin(), trips.end());

  const Electrode& eN = setup[last];
  const Eigen::VectorXd loadN = electrode_load(mesh, eN) / eN.z;
  sys.Psi.resize(m, last);
  sys.Upsilon.resize(last, last);
  sys.rhs = Eigen::VectorXd::Zero(m + last);
  for (Index k = 0; k < last; ++k) {
    const Electrode& ek = setup[k];
    sys.Psi.col(k) = loadN - electrode_load(mesh, ek) / ek.z;
    for (Index l = 0; l < last; ++l) {
      sys.Upsilon(k, l) = eN.length / eN.z + (k == l ? ek.length / ek.z : 0.0);
    }
    sys.rhs[m + k] = currents[k] - currents[last];
  }
  return sys;
}

struct ForwardSolver::Factorization {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analysed = false;
};

ForwardSolver::ForwardSolver(const Mesh& mesh, const ElectrodeSetup& setup,
                             const CurrentPattern& currents, double solver_tol)
    : mesh_(mesh),
      setup_(setup),
      currents_(currents),
      tol_(solver_tol),
      factor_(std::make_unique<Factorization>()) {
  if (!(solver_tol > 0.0)) throw std::invalid_argument("solver_tol must be positive");
  if (currents.size() != setup.size()) {
    throw std::invalid_argument("current pattern does not match electrode count");
  }
}

ForwardSolver::~ForwardSolver() = default;
ForwardSolver::ForwardSolver(ForwardSolver&&) noexcept = default;

ForwardSolution ForwardSolver::solve(const ConductivityField& sigma) {
  const BlockSystem sys = assemble_system(mesh_, sigma, setup_, currents_);
  const Index m = mesh_.node_count();
  const Index last = setup_.size() - 1;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(m + last);
  const double bnorm = sys.rhs.norm();
  last_residual_ = 0.0;
  if (bnorm > 0.0) {
    const Eigen::SparseMatrix<double> A = sys.full();
    auto& ldlt = factor_->ldlt;
    if (!factor_->analysed) {
      ldlt.analyzePattern(A);
      factor_->analysed = true;
    }
    ldlt.factorize(A);
    if (ldlt.info() != Eigen::Success) {
      throw SolverError("forward solve: factorization failed");
    }
    x = ldlt.solve(sys.rhs);
    Eigen::VectorXd r = sys.rhs - A * x;
    last_residual_ = r.norm() / bnorm;
    for (int step = 0; step < 3 && last_residual_ > tol_; ++step) {
      x += ldlt.solve(r);
      r = sys.rhs - A * x;
      last_residual_ = r.norm() / bnorm;
    }
    if (!(last_residual_ <= tol_)) {
      throw SolverError("forward solve: relative residual " + std::to_string(last_residual_) +
                        " exceeds tolerance " + std::to_string(tol_));
    }
  }

  ForwardSolution sol;
  sol.u = x.head(m);
  sol.U.resize(last + 1);
  sol.U.head(last) = x.tail(last);
  sol.U[last] = -x.tail(last).sum();
  sol.grad_u = triangle_gradients(mesh_, sol.u);
  return sol;
}

ForwardSolution solve_forward(const Mesh& mesh, const ConductivityField& sigma,
                              const ElectrodeSetup& setup, const CurrentPattern& currents,
                              double solver_tol) {
  ForwardSolver solver(mesh, setup, currents, solver_tol);
  return solver.solve(sigma);
}

double evaluate_F_sigma(const Mesh& mesh, const ConductivityField& sigma,
                        const ElectrodeSetup& setup, const CurrentPattern& currents,
                        const Candidate& candidate) {
  check_consistent(mesh, sigma, setup, currents);
  check_candidate(mesh, setup, candidate);
  const VectorField grad = triangle_gradients(mesh, candidate.u);
  double energy = 0.0;
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    energy += 0.5 * sigma[t] * mesh.area(t) * grad.row(t).squaredNorm();
  }
  const double h = mesh.h();
  for (Index k = 0; k < setup.size(); ++k) {
    const Electrode& e = setup[k];
    const double Uk = candidate.U[k];
    for (Index edge : e.edges) {
      const auto& be = mesh.boundary_edges()[static_cast<std::size_t>(edge)];
      energy += 0.5 / e.z *
                edge_quadrature::square(h, candidate.u[be.nodes[0]] - Uk, candidate.u[be.nodes[1]] - Uk);
    }
    energy -= currents[k] * Uk;
  }
  return energy;
}

double gateaux_derivative(const Mesh& mesh, const ConductivityField& sigma,
                          const ElectrodeSetup& setup, const CurrentPattern& currents,
                          const Candidate& at, const Candidate& direction) {
  check_consistent(mesh, sigma, setup, currents);
  check_candidate(mesh, setup, at);
  check_candidate(mesh, setup, direction);
  const VectorField gu = triangle_gradients(mesh, at.u);
  const VectorField gv = triangle_gradients(mesh, direction.u);
  double value = 0.0;
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    value += sigma[t] * mesh.area(t) * gu.row(t).dot(gv.row(t));
  }
  const double h = mesh.h();
  for (Index k = 0; k < setup.size(); ++k) {
    const Electrode& e = setup[k];
    for (Index edge : e.edges) {
      const auto& be = mesh.boundary_edges()[static_cast<std::size_t>(edge)];
      const Index p = be.nodes[0], q = be.nodes[1];
      value += edge_quadrature::product(h, at.u[p] - at.U[k], at.u[q] - at.U[k],
                                        direction.u[p] - direction.U[k],
                                        direction.u[q] - direction.U[k]) /
               e.z;
    }
    value -= currents[k] * direction.U[k];
  }
  return value;
}

double electrode_flux(const Mesh& mesh, const ElectrodeSetup& setup,
                      const ForwardSolution& solution, Index k) {
  if (k < 0 || k >= setup.size()) {
    throw std::out_of_range("electrode_flux: electrode " + std::to_string(k) + " out of range");
  }
  check_candidate(mesh, setup, solution);
  const Electrode& e = setup[k];
  const double Uk = solution.U[k];
  double flux = 0.0;
  for (Index edge : e.edges) {
    const auto& be = mesh.boundary_edges()[static_cast<std::size_t>(edge)];
    flux += edge_quadrature::linear(mesh.h(), Uk - solution.u[be.nodes[0]],
                                    Uk - solution.u[be.nodes[1]]);
  }
  return flux / e.z;
}

InteriorCurrent interior_current(const Mesh& mesh, const ConductivityField& sigma,
                                 const ForwardSolution& solution) {
  if (sigma.size() != mesh.triangle_count() || solution.grad_u.rows() != mesh.triangle_count()) {
    throw std::invalid_argument("interior_current: dimension mismatch");
  }
  InteriorCurrent out;
  out.J.resize(mesh.triangle_count(), 2);
  out.a.resize(mesh.triangle_count());
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    out.J.row(t) = -sigma[t] * solution.grad_u.row(t);
    out.a[t] = sigma[t] * solution.grad_u.row(t).norm();
  }
  return out;
}

MaxPrincipleReport check_max_principle(const Mesh& mesh, const ElectrodeSetup& setup,
                                       const Eigen::VectorXd& u) {
  std::vector<char> on_electrode(static_cast<std::size_t>(mesh.node_count()), 0);
  for (Index k = 0; k < setup.size(); ++k) {
    for (Index v : setup.nodes_of(mesh, k)) on_electrode[static_cast<std::size_t>(v)] = 1;
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  MaxPrincipleReport r{inf, -inf, inf, -inf, true};
  for (Index v = 0; v < mesh.node_count(); ++v) {
    if (on_electrode[static_cast<std::size_t>(v)]) {
      r.electrode_min = std::min(r.electrode_min, u[v]);
      r.electrode_max = std::max(r.electrode_max, u[v]);
    } else {
      r.other_min = std::min(r.other_min, u[v]);
      r.other_max = std::max(r.other_max, u[v]);
    }
  }
  const double slack = 1e-8 * (u.maxCoeff() - u.minCoeff());
  r.holds = r.other_max <= r.electrode_max + slack && r.other_min >= r.electrode_min - slack;
  return r;
}

}  // namespace cdii

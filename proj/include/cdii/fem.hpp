#pragma once

#include "cdii/mesh.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <memory>
#include <optional>
#include <stdexcept>

namespace cdii {

/// Linear solve failed to meet its residual target.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-triangle conductivity, strictly positive and finite.
class ConductivityField {
 public:
  explicit ConductivityField(Eigen::VectorXd values);
  static ConductivityField constant(const Mesh& mesh, double value);

  const Eigen::VectorXd& values() const { return values_; }
  double operator[](Index t) const { return values_[t]; }
  Index size() const { return values_.size(); }

 private:
  Eigen::VectorXd values_;
};

/// Net electrode currents I_0..I_N; must sum to zero to 1e-12 max|I|.
class CurrentPattern {
 public:
  explicit CurrentPattern(Eigen::VectorXd currents);

  const Eigen::VectorXd& values() const { return values_; }
  double operator[](Index k) const { return values_[k]; }
  Index size() const { return values_.size(); }
  double max_abs() const { return values_.cwiseAbs().maxCoeff(); }

 private:
  Eigen::VectorXd values_;
};

/// A P1 potential plus electrode voltages. Voltages are expected to lie in the
/// zero-sum hyperplane wherever a function says so.
struct Candidate {
  Eigen::VectorXd u;  // nodal values
  Eigen::VectorXd U;  // electrode voltages, one per electrode
};

struct ForwardSolution : Candidate {
  VectorField grad_u;  // per triangle
};

/// Block form of the discrete problem with U_N eliminated through sum(U) = 0:
/// [Lambda Psi; Psi^T Upsilon] [u; U_0..U_{N-1}] = rhs.
struct BlockSystem {
  Eigen::SparseMatrix<double> Lambda;
  Eigen::MatrixXd Psi;
  Eigen::MatrixXd Upsilon;
  Eigen::VectorXd rhs;

  Eigen::SparseMatrix<double> full() const;
};

/// Per-triangle gradient of a nodal P1 field.
VectorField triangle_gradients(const Mesh& mesh, const Eigen::VectorXd& nodal);

BlockSystem assemble_system(const Mesh& mesh, const ConductivityField& sigma,
                            const ElectrodeSetup& setup, const CurrentPattern& currents);

/// Repeated forward solves on a fixed mesh/electrode/current configuration.
/// The sparsity pattern is analysed once and reused for every conductivity.
class ForwardSolver {
 public:
  ForwardSolver(const Mesh& mesh, const ElectrodeSetup& setup, const CurrentPattern& currents,
                double solver_tol = 1e-10);
  ~ForwardSolver();
  ForwardSolver(ForwardSolver&&) noexcept;
  ForwardSolver& operator=(ForwardSolver&&) = delete;

  ForwardSolution solve(const ConductivityField& sigma);
  /// Relative residual of the last solve.
  double last_residual() const { return last_residual_; }

 private:
  struct Factorization;
  const Mesh& mesh_;
  const ElectrodeSetup& setup_;
  const CurrentPattern& currents_;
  double tol_;
  double last_residual_ = 0.0;
  std::unique_ptr<Factorization> factor_;
};

/// Throws SolverError if the relative residual exceeds solver_tol after refinement.
ForwardSolution solve_forward(const Mesh& mesh, const ConductivityField& sigma,
                              const ElectrodeSetup& setup, const CurrentPattern& currents,
                              double solver_tol = 1e-10);

/// F(u,U) = 1/2 int sigma |grad u|^2 + 1/2 sum 1/z_k int_{e_k} (u - U_k)^2 - sum I_k U_k,
/// with exact edge quadrature.
double evaluate_F_sigma(const Mesh& mesh, const ConductivityField& sigma,
                        const ElectrodeSetup& setup, const CurrentPattern& currents,
                        const Candidate& candidate);

/// <DF(at); direction> =
///   int sigma grad u . grad v + sum 1/z_k int_{e_k} (u - U_k)(v - V_k) - sum I_k V_k.
double gateaux_derivative(const Mesh& mesh, const ConductivityField& sigma,
                          const ElectrodeSetup& setup, const CurrentPattern& currents,
                          const Candidate& at, const Candidate& direction);

/// Net current through electrode k, from the Robin identity: int_{e_k} (U_k - u)/z_k.
double electrode_flux(const Mesh& mesh, const ElectrodeSetup& setup,
                      const ForwardSolution& solution, Index k);

struct InteriorCurrent {
  VectorField J;      // -sigma grad u
  Eigen::VectorXd a;  // |J|
};

InteriorCurrent interior_current(const Mesh& mesh, const ConductivityField& sigma,
                                 const ForwardSolution& solution);

/// Electrode-node extremes versus extremes of every other node.
struct MaxPrincipleReport {
  double electrode_min;
  double electrode_max;
  double other_min;
  double other_max;
  bool holds;
};

/// Holds when other nodes stay inside the electrode range up to 1e-8 range(u).
/// P1 on this mesh is not guaranteed monotone, so callers treat a failure as a warning.
MaxPrincipleReport check_max_principle(const Mesh& mesh, const ElectrodeSetup& setup,
                                       const Eigen::VectorXd& u);

// Exact integrals of P1 traces over one boundary edge of length h.
namespace edge_quadrature {
/// int (f)(g) for f, g linear with end values (f0,f1), (g0,g1).
inline double product(double h, double f0, double f1, double g0, double g1) {
  return h / 6.0 * (2.0 * f0 * g0 + f0 * g1 + f1 * g0 + 2.0 * f1 * g1);
}
inline double square(double h, double f0, double f1) {
  return h / 3.0 * (f0 * f0 + f0 * f1 + f1 * f1);
}
inline double linear(double h, double f0, double f1) { return 0.5 * h * (f0 + f1); }
}  // namespace edge_quadrature

}  // namespace cdii

#pragma once

#include "cdii/fem.hpp"

#include <vector>

namespace cdii {

/// Per-triangle current-density magnitude |sigma grad u|.
class InteriorData {
 public:
  /// Throws std::invalid_argument on negative or non-finite entries.
  explicit InteriorData(Eigen::VectorXd a);

  const Eigen::VectorXd& values() const { return a_; }
  double operator[](Index t) const { return a_[t]; }
  Index size() const { return a_.size(); }
  /// Minimum over triangles.
  double essinf() const { return a_.minCoeff(); }

 private:
  Eigen::VectorXd a_;
};

struct ReconstructionConfig {
  double epsilon = 0.1;  // conductivity clamp [epsilon, 1/epsilon]
  double delta = 1e-7;
  int max_iter = 1000;
  double solver_tol = 1e-10;

  /// Throws std::invalid_argument unless 0 < epsilon < 1, delta > 0, max_iter >= 1.
  void validate() const;
};

struct IterationRecord {
  int iteration;
  double G_a;
  double max_grad_diff;  // NaN for the initial sigma = 1 solve
  double wall_time_ms;
};

struct ReconstructionResult {
  ConductivityField sigma_v;
  ForwardSolution v;
  std::vector<IterationRecord> log;
  bool converged = false;
  int iterations = 0;
};

/// G_a(v,V) = int a |grad v| + sum 1/(2 z_k) int_{e_k} (v - V_k)^2 - sum I_k V_k.
/// The candidate voltages must sum to zero.
double evaluate_G_a(const Mesh& mesh, const InteriorData& data, const ElectrodeSetup& setup,
                    const CurrentPattern& currents, const Candidate& candidate);

/// -1/2 sum_k 1/z_k int_{e_k} (u - U_k)^2, the minimum of G_a at a forward solution.
double min_value_formula(const Mesh& mesh, const ElectrodeSetup& setup,
                         const ForwardSolution& solution);

/// Gradients shorter than this are treated as zero by clamp_conductivity.
inline constexpr double kGradientFloor = 1e-14;

/// clamp(a / |grad|, epsilon, 1/epsilon) per triangle; vanishing gradients map to 1/epsilon.
ConductivityField clamp_conductivity(const InteriorData& data, const VectorField& grad,
                                     double epsilon);

enum class StopDecision { proceed, stop };

/// Discrete sup-norm of a gradient change: max over triangles of the Euclidean norm.
double max_gradient_difference(const VectorField& grad_n, const VectorField& grad_prev);

/// Stop once max_T |grad_n - grad_prev| <= delta * epsilon / essinf_a.
StopDecision stopping_check(const VectorField& grad_n, const VectorField& grad_prev, double delta,
                            double epsilon, double essinf_a);

/// Fixed-point iteration sigma_{n+1} = clamp(a / |grad u_n|), starting from sigma = 1.
/// Forward-solve failures are rethrown as SolverError naming the iteration.
ReconstructionResult reconstruct(const Mesh& mesh, const InteriorData& data,
                                 const ElectrodeSetup& setup, const CurrentPattern& currents,
                                 const ReconstructionConfig& config);

}  // namespace cdii

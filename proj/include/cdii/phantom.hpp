#pragma once

#include "cdii/calibration.hpp"

#include <cstdint>
#include <functional>

namespace cdii {

/// sigma = 1 + amplitude * exp(-|centroid - center|^2 / width) per triangle.
/// Throws std::invalid_argument for amplitude < 0 or width <= 0.
ConductivityField gaussian_phantom(const Mesh& mesh, const Eigen::Vector2d& center,
                                   double amplitude, double width);

struct SimulatedData {
  InteriorData a;
  BoundaryVoltageTrace trace;
  /// Generating solution. For test oracles only; reconstruction must not read it.
  ForwardSolution truth;
};

/// Forward solve on sigma_true, then a = sigma_true |grad u| per triangle and the
/// trace of u on every node of the gamma side.
SimulatedData simulate_data(const Mesh& mesh, const ConductivityField& sigma_true,
                            const ElectrodeSetup& setup, const CurrentPattern& currents,
                            Side gamma_side, double solver_tol = 1e-10);

/// Increasing 1-D map with its derivative.
struct PhiSpec {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

/// sigma / phi'(u) per triangle, producing a conductivity with the same current
/// density magnitude. phi' on a triangle is the discrete chain-rule factor
/// grad(I phi(u)) . grad u / |grad u|^2 of the P1 interpolant, falling back to
/// phi'(u at centroid) where grad u vanishes. For a potential varying along one
/// grid axis this makes the pair exactly equivalent on the mesh.
///
/// phi must be increasing on the nodal values of u and satisfy
/// phi(t) = t + c_k on each electrode's nodal values with sum c_k = 0 (to 1e-10).
ConductivityField transform_nonunique(const Mesh& mesh, const ConductivityField& sigma,
                                      const ElectrodeSetup& setup, const ForwardSolution& solution,
                                      const PhiSpec& phi);

/// Multiplies each value by (1 + level g), g ~ N(0,1) from a seeded mt19937_64 via
/// Box-Muller; results below 1e-6 are raised to 1e-6.
InteriorData add_noise(const InteriorData& data, double level, std::uint64_t seed);

}  // namespace cdii

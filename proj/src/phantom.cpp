#include "cdii/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace cdii {

ConductivityField gaussian_phantom(const Mesh& mesh, const Eigen::Vector2d& center,
                                   double amplitude, double width) {
  if (!(width > 0.0)) throw std::invalid_argument("gaussian_phantom: width must be positive");
  if (!(amplitude >= 0.0)) throw std::invalid_argument("gaussian_phantom: amplitude must be >= 0");
  Eigen::VectorXd sigma(mesh.triangle_count());
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    sigma[t] = 1.0 + amplitude * std::exp(-(mesh.centroid(t) - center).squaredNorm() / width);
  }
  return ConductivityField(std::move(sigma));
}

SimulatedData simulate_data(const Mesh& mesh, const ConductivityField& sigma_true,
                            const ElectrodeSetup& setup, const CurrentPattern& currents,
                            Side gamma_side, double solver_tol) {
  ForwardSolution truth = solve_forward(mesh, sigma_true, setup, currents, solver_tol);
  InteriorCurrent current = interior_current(mesh, sigma_true, truth);
  std::vector<TraceSample> samples;
  for (Index node : mesh.side_nodes_of(gamma_side)) samples.push_back({node, truth.u[node]});
  return SimulatedData{InteriorData(std::move(current.a)),
                       BoundaryVoltageTrace(gamma_side, std::move(samples)), std::move(truth)};
}

ConductivityField transform_nonunique(const Mesh& mesh, const ConductivityField& sigma,
                                      const ElectrodeSetup& setup, const ForwardSolution& solution,
                                      const PhiSpec& phi) {
  const Eigen::VectorXd& u = solution.u;
  if (u.size() != mesh.node_count() || sigma.size() != mesh.triangle_count()) {
    throw std::invalid_argument("transform_nonunique: dimension mismatch");
  }
  const double scale = std::max(1.0, u.cwiseAbs().maxCoeff());
  constexpr double kTol = 1e-10;

  Eigen::VectorXd phi_u(u.size());
  for (Index v = 0; v < u.size(); ++v) phi_u[v] = phi.value(u[v]);

  std::vector<Index> order(static_cast<std::size_t>(u.size()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Index>(i);
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return u[a] < u[b]; });
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (!(phi.derivative(u[order[i]]) > 0.0)) {
      throw std::invalid_argument("transform_nonunique: phi is not increasing on the range of u");
    }
    if (i == 0) continue;
    const double du = u[order[i]] - u[order[i - 1]];
    const double dphi = phi_u[order[i]] - phi_u[order[i - 1]];
    // Values equal up to round-off only need to stay ordered up to round-off.
    if (du > kTol * scale ? !(dphi > 0.0) : dphi < -kTol * scale) {
      throw std::invalid_argument("transform_nonunique: phi is not increasing on the range of u");
    }
  }

  double shift_sum = 0.0;
  for (Index k = 0; k < setup.size(); ++k) {
    const auto nodes = setup.nodes_of(mesh, k);
    const double c = phi_u[nodes.front()] - u[nodes.front()];
    for (Index node : nodes) {
      if (std::abs(phi_u[node] - u[node] - c) > kTol * scale) {
        throw std::invalid_argument("transform_nonunique: phi is not a pure shift on electrode " +
                                    std::to_string(k));
      }
    }
    shift_sum += c;
  }
  if (std::abs(shift_sum) > kTol * scale) {
    throw std::invalid_argument("transform_nonunique: electrode shifts do not sum to zero");
  }

  const VectorField grad_phi = triangle_gradients(mesh, phi_u);
  Eigen::VectorXd out(mesh.triangle_count());
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    const Eigen::RowVector2d g = solution.grad_u.row(t);
    const double g2 = g.squaredNorm();
    double slope = 0.0;
    if (g2 > 1e-24 * scale * scale) slope = grad_phi.row(t).dot(g) / g2;
    if (!(slope > 0.0)) {
      const auto tri = mesh.triangles().row(t);
      slope = phi.derivative((u[tri(0)] + u[tri(1)] + u[tri(2)]) / 3.0);
    }
    out[t] = sigma[t] / slope;
  }
  return ConductivityField(std::move(out));
}

InteriorData add_noise(const InteriorData& data, double level, std::uint64_t seed) {
  if (!(level >= 0.0)) throw std::invalid_argument("add_noise: level must be >= 0");
  if (level == 0.0) return data;
  constexpr double kFloor = 1e-6;
  std::mt19937_64 rng(seed);
  // 53-bit uniforms on (0, 1]; mt19937_64's output sequence is fixed by the standard.
  auto uniform = [&rng] { return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53; };
  Eigen::VectorXd out(data.size());
  double spare = 0.0;
  bool has_spare = false;
  for (Index t = 0; t < data.size(); ++t) {
    double g;
    if (has_spare) {
      g = spare;
      has_spare = false;
    } else {
      const double r = std::sqrt(-2.0 * std::log(uniform()));
      const double theta = 2.0 * std::numbers::pi * uniform();
      g = r * std::cos(theta);
      spare = r * std::sin(theta);
      has_spare = true;
    }
    out[t] = std::max(data[t] * (1.0 + level * g), kFloor);
  }
  return InteriorData(std::move(out));
}

}  // namespace cdii

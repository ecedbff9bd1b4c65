#include <catch_amalgamated.hpp>

#include "cdii/phantom.hpp"
#include "cdii/weighted_gradient.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace cdii;
using namespace cdii::testing;
using Catch::Approx;

namespace {

InteriorData data_from(const Mesh& mesh, const ConductivityField& sigma, const ForwardSolution& sol) {
  return InteriorData(interior_current(mesh, sigma, sol).a);
}

}  // namespace

TEST_CASE("interior data and config validation", "[weighted_gradient]") {
  CHECK_THROWS_AS(InteriorData(Eigen::Vector2d(1.0, -1e-9)), std::invalid_argument);
  CHECK_THROWS_AS(InteriorData(Eigen::Vector2d(1.0, NAN)), std::invalid_argument);
  CHECK(InteriorData(Eigen::Vector3d(0.5, 0.2, 3.0)).essinf() == 0.2);

  ReconstructionConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.epsilon = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.delta = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.max_iter = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("G_a at the closed-form solution", "[weighted_gradient]") {
  for (const auto& [z0, z1, alpha] :
       {std::tuple{0.0083, 0.0083, 0.003}, std::tuple{1.25, 0.25, 1.0}, std::tuple{0.4, 0.1, -2.0}}) {
    TwoElectrodeProblem p(10, z0, z1, alpha);
    const ConductivityField one = ConductivityField::constant(p.mesh, 1.0);
    const ForwardSolution sol = solve_forward(p.mesh, one, p.setup, p.currents);
    const InteriorData a(Eigen::VectorXd::Constant(p.mesh.triangle_count(), std::abs(alpha)));
    const LinearSolution exact(z0, z1, alpha);
    const double G = evaluate_G_a(p.mesh, a, p.setup, p.currents, sol);
    CHECK(G == Approx(exact.weighted_min(z0, z1)).epsilon(1e-9));
    CHECK(min_value_formula(p.mesh, p.setup, sol) == Approx(G).epsilon(1e-9));
  }
}

TEST_CASE("G_a rejects voltages off the zero-sum hyperplane", "[weighted_gradient]") {
  TwoElectrodeProblem p(4, 0.1, 0.1, 1.0);
  const InteriorData a(Eigen::VectorXd::Ones(p.mesh.triangle_count()));
  Candidate c{Eigen::VectorXd::Zero(p.mesh.node_count()), Eigen::Vector2d(1.0, -0.5)};
  CHECK_THROWS_AS(evaluate_G_a(p.mesh, a, p.setup, p.currents, c), std::invalid_argument);
}

TEST_CASE("minimum value identity and local minimality", "[weighted_gradient][property]") {
  std::mt19937_64 rng(17);
  for (int draw = 0; draw < 6; ++draw) {
    RandomDraw d = random_draw(10, rng);
    const ForwardSolution sol = solve_forward(d.mesh, d.sigma, d.setup, d.currents);
    const InteriorData a = data_from(d.mesh, d.sigma, sol);
    const double G = evaluate_G_a(d.mesh, a, d.setup, d.currents, sol);
    const double formula = min_value_formula(d.mesh, d.setup, sol);
    CHECK(std::abs(G - formula) <= 1e-8 * std::max(1.0, std::abs(formula)));
    CHECK(formula <= 0.0);

    const double scale = sol.u.cwiseAbs().maxCoeff() + sol.U.cwiseAbs().maxCoeff();
    for (int k = 0; k < 10; ++k) {
      const Candidate w = random_candidate(d.mesh, d.setup.size(), 1e-3 * scale, rng);
      const Candidate moved{sol.u + w.u, sol.U + w.U};
      CHECK(evaluate_G_a(d.mesh, a, d.setup, d.currents, moved) >= G - 1e-10 * std::abs(G));
    }
  }
}

TEST_CASE("clamped conductivity update", "[weighted_gradient]") {
  const InteriorData a(Eigen::Vector4d(0.5, 0.5, 0.01, 100.0));
  VectorField grad(4, 2);
  grad << 0.25, 0.0,
      0.0, 0.0,
      0.6, 0.8,
      0.0, 1.0;
  const ConductivityField s = clamp_conductivity(a, grad, 0.1);
  CHECK(s[0] == Approx(2.0));
  CHECK(s[1] == 10.0);
  CHECK(s[2] == Approx(0.1));
  CHECK(s[3] == Approx(10.0));

  grad.row(1) << 1e-15, 0.0;
  CHECK(clamp_conductivity(a, grad, 0.1)[1] == 10.0);
}

TEST_CASE("stopping rule", "[weighted_gradient]") {
  // Threshold delta * epsilon / essinf = 1e-7 * 0.1 / 0.003 = 3.33e-6.
  VectorField prev = VectorField::Zero(3, 2);
  VectorField next = prev;
  next.row(1) << 3e-6, 0.0;
  CHECK(max_gradient_difference(next, prev) == Approx(3e-6));
  CHECK(stopping_check(next, prev, 1e-7, 0.1, 0.003) == StopDecision::stop);
  next.row(2) << 2.4e-6, 3.2e-6;  // Euclidean norm 4e-6
  CHECK(max_gradient_difference(next, prev) == Approx(4e-6));
  CHECK(stopping_check(next, prev, 1e-7, 0.1, 0.003) == StopDecision::proceed);

  // Equality stops.
  VectorField eq = prev;
  eq(0, 0) = 0.5;
  CHECK(stopping_check(eq, prev, 0.5, 0.5, 0.5) == StopDecision::stop);
  CHECK_THROWS_AS(stopping_check(eq, prev, 0.5, 0.5, 0.0), std::invalid_argument);
}

TEST_CASE("reconstruction of a constant conductivity stops after one update", "[weighted_gradient]") {
  for (const auto& [z0, z1] : {std::pair{0.0083, 0.0083}, std::pair{1.25, 0.25}}) {
    const double alpha = 0.003;
    TwoElectrodeProblem p(12, z0, z1, alpha);
    const InteriorData a(Eigen::VectorXd::Constant(p.mesh.triangle_count(), alpha));
    const ReconstructionResult r = reconstruct(p.mesh, a, p.setup, p.currents, {});
    CHECK(r.converged);
    CHECK(r.iterations == 1);
    REQUIRE(r.log.size() == 2);
    CHECK(std::isnan(r.log[0].max_grad_diff));
    CHECK(r.log[0].iteration == 0);
    CHECK(r.log[1].max_grad_diff < 1e-12);
    CHECK((r.sigma_v.values().array() - 1.0).abs().maxCoeff() < 1e-9);
    const LinearSolution exact(z0, z1, alpha);
    CHECK(r.v.U[1] == Approx(exact.U1).epsilon(1e-9));
  }
}

TEST_CASE("reconstruction descends and stays in the clamp range", "[weighted_gradient][property]") {
  const Mesh mesh = build_uniform_mesh(20);
  const ElectrodeSetup setup = TwoElectrodeProblem::make_setup(mesh, 0.0083, 0.0083);
  const CurrentPattern I(Eigen::Vector2d(-0.003, 0.003));
  for (const auto& [amp, center] : {std::pair{0.8, Eigen::Vector2d(0.5, 0.5)},
                                    std::pair{3.0, Eigen::Vector2d(0.3, 0.6)}}) {
    const ConductivityField truth = gaussian_phantom(mesh, center, amp, 0.02);
    const SimulatedData sim = simulate_data(mesh, truth, setup, I, Side::right);
    ReconstructionConfig cfg;
    const ReconstructionResult r = reconstruct(mesh, sim.a, setup, I, cfg);
    CHECK(r.converged);
    for (std::size_t n = 1; n < r.log.size(); ++n) {
      CHECK(r.log[n].G_a <= r.log[n - 1].G_a + 1e-12 * std::abs(r.log[n - 1].G_a));
      CHECK(r.log[n].iteration == static_cast<int>(n));
    }
    CHECK(r.sigma_v.values().minCoeff() >= cfg.epsilon);
    CHECK(r.sigma_v.values().maxCoeff() <= 1.0 / cfg.epsilon);
  }
}

TEST_CASE("iteration cap reports non-convergence", "[weighted_gradient]") {
  const Mesh mesh = build_uniform_mesh(12);
  const ElectrodeSetup setup = TwoElectrodeProblem::make_setup(mesh, 0.0083, 0.0083);
  const CurrentPattern I(Eigen::Vector2d(-0.003, 0.003));
  const SimulatedData sim =
      simulate_data(mesh, gaussian_phantom(mesh, {0.5, 0.5}, 0.8, 0.02), setup, I, Side::right);
  ReconstructionConfig cfg;
  cfg.max_iter = 1;
  const ReconstructionResult r = reconstruct(mesh, sim.a, setup, I, cfg);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 1);
  CHECK(r.log.size() == 2);

  const InteriorData zero(Eigen::VectorXd::Zero(mesh.triangle_count()));
  CHECK_THROWS_AS(reconstruct(mesh, zero, setup, I, {}), std::invalid_argument);
}

#include <catch_amalgamated.hpp>

#include "cdii/config.hpp"
#include "cdii/csv.hpp"
#include "cdii/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

using namespace cdii;
using Catch::Approx;

namespace {

const char* const kBase =
    "# two full-side electrodes\n"
    "mesh.side_nodes = 30\n"
    "electrodes[0].side = bottom\n"
    "electrodes[0].z = 0.0083\n"
    "electrodes[1].side = top\n"
    "electrodes[1].interval = 0,1\n"
    "electrodes[1].z = 0.0083\n"
    "currents = -0.003, 0.003\n";

PipelineConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string error_key(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<none>";
}

}  // namespace

TEST_CASE("config parsing", "[io][config]") {
  const PipelineConfig cfg = parse(std::string(kBase) +
                                   "recon.epsilon = 0.2\nrecon.max_iter = 50\n"
                                   "phantom.center = 0.3,0.6\nphantom.amplitude = 0.8\n"
                                   "gamma.side = left\nnoise.level = 0.01\nnoise.seed = 7\n"
                                   "output.dir = results\n");
  CHECK(cfg.side_nodes == 30);
  REQUIRE(cfg.electrodes.size() == 2);
  CHECK(cfg.electrodes[0].side == Side::bottom);
  CHECK(cfg.electrodes[0].lo == 0.0);
  CHECK(cfg.electrodes[0].hi == 1.0);
  CHECK(cfg.electrodes[1].z == 0.0083);
  CHECK(cfg.currents == std::vector<double>{-0.003, 0.003});
  CHECK(cfg.recon.epsilon == 0.2);
  CHECK(cfg.recon.delta == 1e-7);
  CHECK(cfg.recon.max_iter == 50);
  CHECK(cfg.phantom.center.isApprox(Eigen::Vector2d(0.3, 0.6)));
  CHECK(cfg.phantom.amplitude == 0.8);
  CHECK(cfg.phantom.width == 0.02);
  CHECK(cfg.gamma_side == Side::left);
  CHECK(cfg.noise_level == 0.01);
  CHECK(cfg.noise_seed == 7);
  CHECK(cfg.output_dir == "results");

  const PipelineConfig defaults = parse(kBase);
  CHECK(defaults.gamma_side == Side::right);
  CHECK(defaults.output_dir == "out");
  CHECK(defaults.noise_level == 0.0);
}

TEST_CASE("config errors name the key", "[io][config]") {
  const std::string base = kBase;
  CHECK(error_key(base + "mesh.sides = 3\n") == "mesh.sides");
  CHECK(error_key(base + "recon.epsilon = 1.5\n") == "recon.epsilon");
  CHECK(error_key(base + "recon.delta = abc\n") == "recon.delta");
  CHECK(error_key(base + "electrodes[0].interval = 0.7,0.2\n") == "electrodes[0].interval");
  CHECK(error_key(base + "electrodes[3].side = left\nelectrodes[3].z = 1\n") == "electrodes[3]");
  CHECK(error_key(base + "gamma.side = middle\n") == "gamma.side");
  CHECK(error_key(base + "mesh.side_nodes = 4\n") == "mesh.side_nodes");
  CHECK(error_key("mesh.side_nodes = 1\n") == "mesh.side_nodes");
  CHECK(error_key("mesh.side_nodes = 4\nelectrodes[0].side = top\nelectrodes[0].z = 1\n"
                  "currents = 0\n") == "electrodes");
  CHECK(error_key("mesh.side_nodes = 4\nelectrodes[0].side = top\nelectrodes[0].z = 1\n"
                  "electrodes[1].side = bottom\nelectrodes[1].z = -1\ncurrents = 1,-1\n") ==
        "electrodes[1].z");
  CHECK(error_key("mesh.side_nodes = 4\nelectrodes[0].side = top\nelectrodes[0].z = 1\n"
                  "electrodes[1].side = bottom\nelectrodes[1].z = 1\ncurrents = 1,-0.5\n") ==
        "currents");
  CHECK(error_key("just text\n") == "line 1");
  CHECK_THROWS_AS(load_config("/nonexistent/cdii.cfg"), ConfigError);
}

TEST_CASE("field csv round trip", "[io][csv]") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");

  Eigen::MatrixXd values(3, 2);
  values << 0.1, -2.0 / 3.0, 1e-300, 5e10, std::nextafter(1.0, 2.0), 0.0;
  std::ostringstream out;
  write_field(out, {"J", "A/m^2", "triangle"}, values);
  CHECK(out.str().rfind("# J,A/m^2,triangle\n0,", 0) == 0);

  std::istringstream in(out.str());
  const FieldTable table = read_field(in);
  CHECK(table.header.quantity == "J");
  CHECK(table.header.unit == "A/m^2");
  CHECK(table.header.entity == "triangle");
  CHECK(table.ids == std::vector<Index>{0, 1, 2});
  CHECK(table.values == values);

  std::istringstream bad("# a,b,node\n0,1\n1,x\n");
  CHECK_THROWS_AS(read_field(bad), std::runtime_error);
  std::istringstream headerless("0,1\n");
  CHECK_THROWS_AS(read_field(headerless), std::runtime_error);
}

TEST_CASE("trace and phi csv", "[io][csv]") {
  const BoundaryVoltageTrace trace(Side::right, {{3, 0.25}, {7, -1.0 / 3.0}});
  std::ostringstream out;
  write_trace_csv(out, trace);
  CHECK(out.str().rfind("# u_trace,V,node\n", 0) == 0);
  std::istringstream in(out.str());
  const BoundaryVoltageTrace back = read_trace_csv(in, Side::right);
  REQUIRE(back.samples().size() == 2);
  CHECK(back.samples()[1].node == 7);
  CHECK(back.samples()[1].u == -1.0 / 3.0);

  const PhiMap phi({0.0, 1.0}, {0.5, 2.5}, false, 0.0);
  std::ostringstream phi_out;
  write_phi_csv(phi_out, phi);
  CHECK(phi_out.str() == "# phi,V,breakpoint\n0,0.5\n1,2.5\n");

  std::ostringstream log_out;
  write_convergence_csv(log_out, {{0, -1.5, std::numeric_limits<double>::quiet_NaN(), 0.25},
                                  {1, -2.0, 1e-3, 0.5}});
  CHECK(log_out.str() ==
        "iteration,G_a,max_grad_diff,wall_time_ms\n0,-1.5,nan,0.25\n1,-2,0.001,0.5\n");
}

TEST_CASE("field metrics", "[io][metrics]") {
  const Eigen::VectorXd ref = Eigen::VectorXd::LinSpaced(8, 1.0, 2.0);
  const FieldMetrics scaled = compare_uniform_fields(ref, 1.1 * ref);
  CHECK(scaled.relative_l2 == Approx(0.1));
  CHECK(scaled.max_error == Approx(0.2));

  const FieldMetrics shifted =
      compare_uniform_fields(Eigen::VectorXd::Constant(5, 2.0), Eigen::VectorXd::Constant(5, 2.1));
  CHECK(shifted.absolute_l2 == Approx(0.1));
  CHECK(shifted.relative_l2 == Approx(0.05));

  const Mesh mesh = build_uniform_mesh(3);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(mesh.triangle_count());
  CHECK(compare_fields(mesh, one, one).relative_l2 == 0.0);
  CHECK_THROWS_AS(compare_uniform_fields(ref, ref.head(3)), std::invalid_argument);
}

#pragma once

#include "cdii/weighted_gradient.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdii {

/// Invalid configuration; key() is the dotted path of the offending entry,
/// e.g. "electrodes[0].interval".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct ElectrodeConfig {
  Side side = Side::bottom;
  double lo = 0.0;
  double hi = 1.0;
  double z = 0.0;
};

struct PhantomConfig {
  Eigen::Vector2d center{0.5, 0.5};
  double amplitude = 0.0;
  double width = 0.02;
};

/// Flat key=value configuration. Recognised keys:
///
///   mesh.side_nodes          integer >= 2 (required)
///   electrodes[k].side       bottom|right|top|left (required per electrode)
///   electrodes[k].interval   lo,hi along the side (default 0,1)
///   electrodes[k].z          contact impedance > 0 (required)
///   currents                 comma list, one per electrode, summing to zero (required)
///   recon.epsilon, recon.delta, recon.max_iter, recon.solver_tol
///   phantom.center           x,y   phantom.amplitude   phantom.width
///   gamma.side               side carrying the boundary voltage trace (default right)
///   noise.level, noise.seed
///   output.dir
///
/// Blank lines and lines starting with '#' are ignored.
struct PipelineConfig {
  Index side_nodes = 0;
  std::vector<ElectrodeConfig> electrodes;
  std::vector<double> currents;
  ReconstructionConfig recon;
  PhantomConfig phantom;
  Side gamma_side = Side::right;
  double noise_level = 0.0;
  std::uint64_t noise_seed = 0;
  std::string output_dir = "out";
};

/// Throws ConfigError naming the offending key.
PipelineConfig parse_config(std::istream& in);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace cdii

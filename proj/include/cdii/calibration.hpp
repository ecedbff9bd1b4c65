#pragma once

#include "cdii/weighted_gradient.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace cdii {

/// Measured potential at boundary nodes along the curve Gamma.
struct TraceSample {
  Index node;
  double u;
};

class BoundaryVoltageTrace {
 public:
  BoundaryVoltageTrace(Side side, std::vector<TraceSample> samples);

  Side side() const { return side_; }
  const std::vector<TraceSample>& samples() const { return samples_; }

 private:
  Side side_;
  std::vector<TraceSample> samples_;
};

/// Gamma must be a full mesh side whose two end nodes lie on two different
/// electrodes (so that Gamma joined with the electrodes is connected), and the
/// trace must cover every node of that side. Throws std::invalid_argument.
void validate_gamma(const Mesh& mesh, const ElectrodeSetup& setup,
                    const BoundaryVoltageTrace& trace);

/// Measured voltage U_k of one electrode, for the optional electrode pairs.
struct ElectrodeVoltage {
  Index electrode;
  double U;
};

struct CalibrationPair {
  double s;  // computed potential v
  double t;  // measured potential u
};

/// Pairs (v(p), u_measured(p)) for every trace node p, plus (v, v - V_k + U_k) on the
/// nodes of each electrode whose voltage is supplied. Sorted by s; s-values within
/// 1e-12 of each other are merged with their t averaged.
/// Throws std::invalid_argument for off-boundary trace nodes or fewer than 2 distinct pairs.
std::vector<CalibrationPair> collect_pairs(const Mesh& mesh, const ElectrodeSetup& setup,
                                           const ReconstructionResult& recon,
                                           const BoundaryVoltageTrace& trace,
                                           std::span<const ElectrodeVoltage> electrode_voltages = {});

/// Monotone piecewise-linear map s -> t, extended linearly beyond its end segments.
class PhiMap {
 public:
  PhiMap(std::vector<double> breakpoints, std::vector<double> values, bool repaired,
         double max_repair_shift);

  const std::vector<double>& breakpoints() const { return s_; }
  const std::vector<double>& values() const { return t_; }
  const std::vector<double>& slopes() const { return slopes_; }
  /// True when adjacent violators had to be pooled.
  bool repaired() const { return repaired_; }
  /// Largest |t_in - t_pooled| over the input pairs.
  double max_repair_shift() const { return max_repair_shift_; }

  double operator()(double s) const;
  double derivative(double s) const;

 private:
  std::size_t segment(double s) const;

  std::vector<double> s_;
  std::vector<double> t_;
  std::vector<double> slopes_;
  bool repaired_;
  double max_repair_shift_;
};

/// Interpolates the pairs, pooling adjacent violators until every slope is positive.
/// Each pooled block collapses to one breakpoint at its mean (s, t).
/// Throws std::invalid_argument for fewer than 2 distinct s-values or a flat map.
PhiMap build_monotone_map(std::span<const CalibrationPair> pairs);

/// sigma_v / phi'(v at centroid), per triangle.
ConductivityField apply_calibration(const Mesh& mesh, const ReconstructionResult& recon,
                                    const PhiMap& phi);

}  // namespace cdii

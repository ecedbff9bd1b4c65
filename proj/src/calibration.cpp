#include "cdii/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cdii {

BoundaryVoltageTrace::BoundaryVoltageTrace(Side side, std::vector<TraceSample> samples)
    : side_(side), samples_(std::move(samples)) {
  for (const auto& s : samples_) {
    if (!std::isfinite(s.u)) throw std::invalid_argument("trace value is not finite");
  }
}

void validate_gamma(const Mesh& mesh, const ElectrodeSetup& setup,
                    const BoundaryVoltageTrace& trace) {
  const std::vector<Index> side = mesh.side_nodes_of(trace.side());
  std::vector<Index> got;
  for (const auto& s : trace.samples()) got.push_back(s.node);
  std::sort(got.begin(), got.end());
  got.erase(std::unique(got.begin(), got.end()), got.end());
  std::vector<Index> want = side;
  std::sort(want.begin(), want.end());
  if (got != want) {
    throw std::invalid_argument("trace must cover exactly the nodes of the " +
                                std::string(to_string(trace.side())) + " side");
  }
  const Index first = setup.electrode_of_node(mesh, side.front());
  const Index last = setup.electrode_of_node(mesh, side.back());
  if (first < 0 || last < 0 || first == last) {
    throw std::invalid_argument("the " + std::string(to_string(trace.side())) +
                                " side does not join two different electrodes");
  }
}

namespace {

constexpr double kMergeTol = 1e-12;

/// Sorts by s and averages t over runs of s within kMergeTol.
std::vector<CalibrationPair> sort_and_merge(std::vector<CalibrationPair> pairs) {
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const CalibrationPair& a, const CalibrationPair& b) { return a.s < b.s; });
  std::vector<CalibrationPair> merged;
  std::size_t i = 0;
  while (i < pairs.size()) {
    std::size_t j = i;
    double s_sum = 0.0, t_sum = 0.0;
    while (j < pairs.size() && pairs[j].s - pairs[i].s <= kMergeTol) {
      s_sum += pairs[j].s;
      t_sum += pairs[j].t;
      ++j;
    }
    const auto count = static_cast<double>(j - i);
    merged.push_back({s_sum / count, t_sum / count});
    i = j;
  }
  return merged;
}

}  // namespace

std::vector<CalibrationPair> collect_pairs(const Mesh& mesh, const ElectrodeSetup& setup,
                                           const ReconstructionResult& recon,
                                           const BoundaryVoltageTrace& trace,
                                           std::span<const ElectrodeVoltage> electrode_voltages) {
  const Eigen::VectorXd& v = recon.v.u;
  if (v.size() != mesh.node_count()) {
    throw std::invalid_argument("collect_pairs: reconstruction does not match the mesh");
  }
  std::vector<CalibrationPair> pairs;
  for (const auto& sample : trace.samples()) {
    if (!mesh.on_boundary(sample.node)) {
      throw std::invalid_argument("collect_pairs: trace node " + std::to_string(sample.node) +
                                  " is not on the boundary");
    }
    pairs.push_back({v[sample.node], sample.u});
  }
  // On electrode k the measured and computed potentials differ by U_k - V_k.
  for (const auto& ev : electrode_voltages) {
    if (ev.electrode < 0 || ev.electrode >= setup.size()) {
      throw std::invalid_argument("collect_pairs: electrode index out of range");
    }
    const double shift = ev.U - recon.v.U[ev.electrode];
    for (Index node : setup.nodes_of(mesh, ev.electrode)) pairs.push_back({v[node], v[node] + shift});
  }
  auto merged = sort_and_merge(std::move(pairs));
  if (merged.size() < 2) {
    throw std::invalid_argument("collect_pairs: fewer than 2 distinct calibration pairs");
  }
  return merged;
}

PhiMap::PhiMap(std::vector<double> breakpoints, std::vector<double> values, bool repaired,
               double max_repair_shift)
    : s_(std::move(breakpoints)),
      t_(std::move(values)),
      repaired_(repaired),
      max_repair_shift_(max_repair_shift) {
  if (s_.size() < 2 || s_.size() != t_.size()) {
    throw std::invalid_argument("PhiMap needs at least two matching breakpoints");
  }
  for (std::size_t i = 0; i + 1 < s_.size(); ++i) {
    const double ds = s_[i + 1] - s_[i];
    const double slope = (t_[i + 1] - t_[i]) / ds;
    if (!(ds > 0.0) || !(slope > 0.0) || !std::isfinite(slope)) {
      throw std::invalid_argument("PhiMap must be strictly increasing");
    }
    slopes_.push_back(slope);
  }
}

std::size_t PhiMap::segment(double s) const {
  const auto it = std::upper_bound(s_.begin(), s_.end(), s);
  const auto idx = static_cast<std::ptrdiff_t>(it - s_.begin()) - 1;
  return static_cast<std::size_t>(
      std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(slopes_.size()) - 1));
}

double PhiMap::operator()(double s) const {
  const std::size_t k = segment(s);
  return t_[k] + slopes_[k] * (s - s_[k]);
}

double PhiMap::derivative(double s) const { return slopes_[segment(s)]; }

PhiMap build_monotone_map(std::span<const CalibrationPair> pairs) {
  const auto sorted = sort_and_merge(std::vector<CalibrationPair>(pairs.begin(), pairs.end()));
  if (sorted.size() < 2) {
    throw std::invalid_argument("build_monotone_map: fewer than 2 distinct s-values");
  }

  struct Block {
    std::size_t first, last;  // inclusive range into sorted
    double s, t;              // means
  };
  std::vector<Block> blocks;
  bool repaired = false;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    Block b{i, i, sorted[i].s, sorted[i].t};
    // Pool while the new block would not rise strictly above its predecessor.
    while (!blocks.empty() && blocks.back().t >= b.t) {
      const Block& prev = blocks.back();
      const auto n_prev = static_cast<double>(prev.last - prev.first + 1);
      const auto n_b = static_cast<double>(b.last - b.first + 1);
      b = Block{prev.first, b.last, (n_prev * prev.s + n_b * b.s) / (n_prev + n_b),
                (n_prev * prev.t + n_b * b.t) / (n_prev + n_b)};
      blocks.pop_back();
      repaired = true;
    }
    blocks.push_back(b);
  }
  if (blocks.size() < 2) {
    throw std::invalid_argument("build_monotone_map: measured values are flat");
  }

  std::vector<double> s, t;
  double shift = 0.0;
  for (const auto& b : blocks) {
    s.push_back(b.s);
    t.push_back(b.t);
    for (std::size_t i = b.first; i <= b.last; ++i) shift = std::max(shift, std::abs(sorted[i].t - b.t));
  }
  return PhiMap(std::move(s), std::move(t), repaired, shift);
}

ConductivityField apply_calibration(const Mesh& mesh, const ReconstructionResult& recon,
                                    const PhiMap& phi) {
  const Eigen::VectorXd& v = recon.v.u;
  if (v.size() != mesh.node_count() || recon.sigma_v.size() != mesh.triangle_count()) {
    throw std::invalid_argument("apply_calibration: reconstruction does not match the mesh");
  }
  Eigen::VectorXd sigma(mesh.triangle_count());
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    const auto tri = mesh.triangles().row(t);
    const double v_centroid = (v[tri(0)] + v[tri(1)] + v[tri(2)]) / 3.0;
    const double slope = phi.derivative(v_centroid);
    if (!(slope > 0.0)) throw std::invalid_argument("apply_calibration: non-positive phi'");
    sigma[t] = recon.sigma_v[t] / slope;
  }
  return ConductivityField(std::move(sigma));
}

}  // namespace cdii

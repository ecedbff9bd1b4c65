#include "cdii/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cdii {

FieldMetrics compare_fields(const Eigen::VectorXd& reference, const Eigen::VectorXd& candidate,
                            const Eigen::VectorXd& areas) {
  if (reference.size() != candidate.size() || reference.size() != areas.size() ||
      reference.size() == 0) {
    throw std::invalid_argument("compare_fields: fields differ in length (" +
                                std::to_string(reference.size()) + " vs " +
                                std::to_string(candidate.size()) + ")");
  }
  const Eigen::VectorXd diff = candidate - reference;
  const double abs_l2 = std::sqrt(areas.dot(diff.cwiseAbs2()));
  const double ref_l2 = std::sqrt(areas.dot(reference.cwiseAbs2()));
  return {ref_l2 > 0.0 ? abs_l2 / ref_l2 : (abs_l2 > 0.0 ? INFINITY : 0.0), abs_l2,
          diff.cwiseAbs().maxCoeff()};
}

FieldMetrics compare_fields(const Mesh& mesh, const Eigen::VectorXd& reference,
                            const Eigen::VectorXd& candidate) {
  Eigen::VectorXd areas(mesh.triangle_count());
  for (Index t = 0; t < mesh.triangle_count(); ++t) areas[t] = mesh.area(t);
  return compare_fields(reference, candidate, areas);
}

FieldMetrics compare_uniform_fields(const Eigen::VectorXd& reference,
                                    const Eigen::VectorXd& candidate) {
  const Index n = reference.size();
  return compare_fields(reference, candidate,
                        Eigen::VectorXd::Constant(n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0));
}

}  // namespace cdii

#pragma once

#include "cdii/mesh.hpp"

namespace cdii {

struct FieldMetrics {
  double relative_l2;  // ||c - r|| / ||r||, area weighted
  double absolute_l2;  // ||c - r||, area weighted
  double max_error;    // max |c - r|
};

/// Throws std::invalid_argument on length mismatch.
FieldMetrics compare_fields(const Eigen::VectorXd& reference, const Eigen::VectorXd& candidate,
                            const Eigen::VectorXd& areas);

/// Per-triangle fields on mesh.
FieldMetrics compare_fields(const Mesh& mesh, const Eigen::VectorXd& reference,
                            const Eigen::VectorXd& candidate);

/// Equal-area triangles covering the unit square, as on every uniform mesh.
FieldMetrics compare_uniform_fields(const Eigen::VectorXd& reference,
                                    const Eigen::VectorXd& candidate);

}  // namespace cdii

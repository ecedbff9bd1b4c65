#pragma once

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cdii {

using Index = Eigen::Index;

/// Sides of the unit box, counterclockwise from y = 0.
enum class Side { bottom, right, top, left };

std::string_view to_string(Side side);
/// Throws std::invalid_argument for anything but bottom/right/top/left.
Side parse_side(std::string_view text);

struct BoundaryEdge {
  std::array<Index, 2> nodes;  // ordered by increasing along-side coordinate
  Side side;
  Index triangle;
};

using NodeMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;
using TriangleMatrix = Eigen::Matrix<Index, Eigen::Dynamic, 3, Eigen::RowMajor>;
/// One row per vertex, holding the constant gradient of that vertex's hat function.
using LocalGradients = Eigen::Matrix<double, 3, 2>;
/// One row per triangle (or per node, depending on context).
using VectorField = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

/// Uniform right-triangle mesh of [0,1]^2.
///
/// Nodes are numbered row-major from the southwest corner: node (i, j) sits at
/// (i h, j h) with id j * side_nodes + i. Each grid cell c = j (side_nodes - 1) + i
/// owns two triangles, 2c (southwest anchored: SW, SE, NW) and 2c + 1 (northeast
/// anchored: NE, NW, SE). Both are stored counterclockwise. Boundary edges are
/// listed side by side (bottom, right, top, left), each side ordered by its
/// along-side coordinate.
class Mesh {
 public:
  Mesh(Index side_nodes, NodeMatrix nodes, TriangleMatrix triangles,
       std::vector<BoundaryEdge> boundary_edges);

  Index side_nodes() const { return side_nodes_; }
  double h() const { return h_; }
  Index node_count() const { return nodes_.rows(); }
  Index triangle_count() const { return triangles_.rows(); }

  const NodeMatrix& nodes() const { return nodes_; }
  const TriangleMatrix& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }

  Eigen::Vector2d node(Index id) const { return nodes_.row(id).transpose(); }
  Index node_id(Index i, Index j) const { return j * side_nodes_ + i; }
  double area(Index triangle) const { return areas_[static_cast<std::size_t>(triangle)]; }
  Eigen::Vector2d centroid(Index triangle) const;
  const LocalGradients& gradients(Index triangle) const {
    return gradients_[static_cast<std::size_t>(triangle)];
  }

  /// Node ids along one side, ordered by the along-side coordinate.
  std::vector<Index> side_nodes_of(Side side) const;
  bool on_boundary(Index node) const;

 private:
  Index side_nodes_;
  double h_;
  NodeMatrix nodes_;
  TriangleMatrix triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<double> areas_;
  std::vector<LocalGradients> gradients_;
};

/// Throws std::invalid_argument if side_nodes < 2.
Mesh build_uniform_mesh(Index side_nodes);

/// Constant hat-function gradients of a triangle, in vertex order.
/// Throws std::out_of_range for an invalid triangle id.
LocalGradients basis_gradients(const Mesh& mesh, Index triangle);

/// Values of the three local hat functions at point p (barycentric coordinates).
Eigen::Vector3d barycentric(const Mesh& mesh, Index triangle, const Eigen::Vector2d& p);

/// Triangles incident to a node.
std::vector<Index> adjacent_triangles(const Mesh& mesh, Index node);

// Electrodes ---------------------------------------------------------------

struct Electrode {
  Side side;
  std::vector<Index> edges;  // indices into Mesh::boundary_edges(), contiguous
  double z;                  // contact impedance
  double length;
};

class ElectrodeSetup {
 public:
  explicit ElectrodeSetup(std::vector<Electrode> electrodes);

  Index size() const { return static_cast<Index>(electrodes_.size()); }
  const Electrode& operator[](Index k) const { return electrodes_.at(static_cast<std::size_t>(k)); }
  const std::vector<Electrode>& electrodes() const { return electrodes_; }

  /// Distinct node ids touched by electrode k, sorted.
  std::vector<Index> nodes_of(const Mesh& mesh, Index k) const;
  /// Electrode owning a node, or -1. Shared end nodes report the lower index.
  Index electrode_of_node(const Mesh& mesh, Index node) const;

 private:
  std::vector<Electrode> electrodes_;
};

/// Interval [lo, hi] along a side; x for bottom/top, y for left/right.
struct ElectrodeSpan {
  Side side;
  double lo;
  double hi;
};

/// Which field of which electrode was rejected by locate_electrodes.
class ElectrodeSpanError : public std::invalid_argument {
 public:
  ElectrodeSpanError(Index electrode, std::string field, const std::string& what)
      : std::invalid_argument(what), electrode_(electrode), field_(std::move(field)) {}
  Index electrode() const { return electrode_; }
  const std::string& field() const { return field_; }

 private:
  Index electrode_;
  std::string field_;
};

/// Maps side intervals onto mesh boundary edges. Interval ends must hit grid
/// nodes to 1e-12; spans must not share an edge; impedances must be positive.
ElectrodeSetup locate_electrodes(const Mesh& mesh, std::span<const ElectrodeSpan> spans,
                                 std::span<const double> impedances);

/// "# mesh" CSV dump: a node table (id,x,y) followed by a triangle table (id,v0,v1,v2).
void write_mesh_csv(std::ostream& out, const Mesh& mesh);

}  // namespace cdii

#include "cdii/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace cdii {

std::string_view to_string(Side side) {
  switch (side) {
    case Side::bottom: return "bottom";
    case Side::right: return "right";
    case Side::top: return "top";
    case Side::left: return "left";
  }
  return "?";
}

Side parse_side(std::string_view text) {
  if (text == "bottom") return Side::bottom;
  if (text == "right") return Side::right;
  if (text == "top") return Side::top;
  if (text == "left") return Side::left;
  throw std::invalid_argument("unknown side '" + std::string(text) + "'");
}

Mesh::Mesh(Index side_nodes, NodeMatrix nodes, TriangleMatrix triangles,
           std::vector<BoundaryEdge> boundary_edges)
    : side_nodes_(side_nodes),
      h_(1.0 / static_cast<double>(side_nodes - 1)),
      nodes_(std::move(nodes)),
      triangles_(std::move(triangles)),
      boundary_edges_(std::move(boundary_edges)) {
  areas_.reserve(static_cast<std::size_t>(triangles_.rows()));
  gradients_.reserve(static_cast<std::size_t>(triangles_.rows()));
  for (Index t = 0; t < triangles_.rows(); ++t) {
    const Eigen::Vector2d p0 = node(triangles_(t, 0));
    const Eigen::Vector2d p1 = node(triangles_(t, 1));
    const Eigen::Vector2d p2 = node(triangles_(t, 2));
    const double twice_area = (p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x();
    areas_.push_back(0.5 * std::abs(twice_area));
    // grad(lambda_i) = rot90(p_{i+2} - p_{i+1}) / (2A), with signed A.
    LocalGradients g;
    g.row(0) << (p1.y() - p2.y()), (p2.x() - p1.x());
    g.row(1) << (p2.y() - p0.y()), (p0.x() - p2.x());
    g.row(2) << (p0.y() - p1.y()), (p1.x() - p0.x());
    gradients_.push_back(g / twice_area);
  }
}

Eigen::Vector2d Mesh::centroid(Index triangle) const {
  return (node(triangles_(triangle, 0)) + node(triangles_(triangle, 1)) +
          node(triangles_(triangle, 2))) / 3.0;
}

std::vector<Index> Mesh::side_nodes_of(Side side) const {
  const Index n = side_nodes_;
  std::vector<Index> ids;
  ids.reserve(static_cast<std::size_t>(n));
  for (Index s = 0; s < n; ++s) {
    switch (side) {
      case Side::bottom: ids.push_back(node_id(s, 0)); break;
      case Side::top: ids.push_back(node_id(s, n - 1)); break;
      case Side::left: ids.push_back(node_id(0, s)); break;
      case Side::right: ids.push_back(node_id(n - 1, s)); break;
    }
  }
  return ids;
}

bool Mesh::on_boundary(Index node) const {
  if (node < 0 || node >= node_count()) return false;
  const Index i = node % side_nodes_;
  const Index j = node / side_nodes_;
  return i == 0 || j == 0 || i == side_nodes_ - 1 || j == side_nodes_ - 1;
}

Mesh build_uniform_mesh(Index side_nodes) {
  if (side_nodes < 2) {
    throw std::invalid_argument("build_uniform_mesh: side_nodes must be >= 2, got " +
                                std::to_string(side_nodes));
  }
  const Index n = side_nodes;
  const double h = 1.0 / static_cast<double>(n - 1);
  auto id = [n](Index i, Index j) { return j * n + i; };

  NodeMatrix nodes(n * n, 2);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      // Pin the far side exactly to 1.
      nodes(id(i, j), 0) = (i == n - 1) ? 1.0 : static_cast<double>(i) * h;
      nodes(id(i, j), 1) = (j == n - 1) ? 1.0 : static_cast<double>(j) * h;
    }
  }

  const Index cells = n - 1;
  TriangleMatrix triangles(2 * cells * cells, 3);
  for (Index j = 0; j < cells; ++j) {
    for (Index i = 0; i < cells; ++i) {
      const Index c = j * cells + i;
      const Index sw = id(i, j), se = id(i + 1, j), nw = id(i, j + 1), ne = id(i + 1, j + 1);
      triangles.row(2 * c) << sw, se, nw;
      triangles.row(2 * c + 1) << ne, nw, se;
    }
  }

  // Every boundary edge lies on exactly one triangle: bottom/left edges on the
  // southwest-anchored triangle, top/right edges on the northeast-anchored one.
  std::vector<BoundaryEdge> edges;
  edges.reserve(static_cast<std::size_t>(4 * cells));
  for (Index s = 0; s < cells; ++s) {
    edges.push_back({{id(s, 0), id(s + 1, 0)}, Side::bottom, 2 * s});
  }
  for (Index s = 0; s < cells; ++s) {
    edges.push_back({{id(n - 1, s), id(n - 1, s + 1)}, Side::right, 2 * (s * cells + cells - 1) + 1});
  }
  for (Index s = 0; s < cells; ++s) {
    edges.push_back({{id(s, n - 1), id(s + 1, n - 1)}, Side::top, 2 * ((cells - 1) * cells + s) + 1});
  }
  for (Index s = 0; s < cells; ++s) {
    edges.push_back({{id(0, s), id(0, s + 1)}, Side::left, 2 * (s * cells)});
  }
  return Mesh(n, std::move(nodes), std::move(triangles), std::move(edges));
}

LocalGradients basis_gradients(const Mesh& mesh, Index triangle) {
  if (triangle < 0 || triangle >= mesh.triangle_count()) {
    throw std::out_of_range("basis_gradients: triangle " + std::to_string(triangle) +
                            " out of range");
  }
  return mesh.gradients(triangle);
}

Eigen::Vector3d barycentric(const Mesh& mesh, Index triangle, const Eigen::Vector2d& p) {
  const LocalGradients& g = mesh.gradients(triangle);
  Eigen::Vector3d lambda;
  for (int v = 0; v < 3; ++v) {
    const Eigen::Vector2d anchor = mesh.node(mesh.triangles()(triangle, v));
    lambda[v] = 1.0 + g.row(v).dot(p - anchor);
  }
  return lambda;
}

std::vector<Index> adjacent_triangles(const Mesh& mesh, Index node) {
  std::vector<Index> out;
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    const auto tri = mesh.triangles().row(t);
    if (tri(0) == node || tri(1) == node || tri(2) == node) out.push_back(t);
  }
  return out;
}

ElectrodeSetup::ElectrodeSetup(std::vector<Electrode> electrodes)
    : electrodes_(std::move(electrodes)) {
  if (electrodes_.size() < 2) {
    throw std::invalid_argument("ElectrodeSetup: need at least two electrodes");
  }
  for (std::size_t k = 0; k < electrodes_.size(); ++k) {
    const auto& e = electrodes_[k];
    if (e.edges.empty()) {
      throw std::invalid_argument("electrode " + std::to_string(k) + " has no edges");
    }
    if (!(e.z > 0.0) || !std::isfinite(e.z)) {
      throw std::invalid_argument("electrode " + std::to_string(k) + " impedance must be positive");
    }
  }
  for (std::size_t a = 0; a < electrodes_.size(); ++a) {
    for (std::size_t b = a + 1; b < electrodes_.size(); ++b) {
      for (Index edge : electrodes_[a].edges) {
        if (std::find(electrodes_[b].edges.begin(), electrodes_[b].edges.end(), edge) !=
            electrodes_[b].edges.end()) {
          throw std::invalid_argument("electrodes " + std::to_string(a) + " and " +
                                      std::to_string(b) + " share a boundary edge");
        }
      }
    }
  }
}

std::vector<Index> ElectrodeSetup::nodes_of(const Mesh& mesh, Index k) const {
  std::vector<Index> ids;
  for (Index e : (*this)[k].edges) {
    const auto& edge = mesh.boundary_edges()[static_cast<std::size_t>(e)];
    ids.push_back(edge.nodes[0]);
    ids.push_back(edge.nodes[1]);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

Index ElectrodeSetup::electrode_of_node(const Mesh& mesh, Index node) const {
  for (Index k = 0; k < size(); ++k) {
    const auto ids = nodes_of(mesh, k);
    if (std::binary_search(ids.begin(), ids.end(), node)) return k;
  }
  return -1;
}

namespace {

double along(const Mesh& mesh, Side side, Index node) {
  const Eigen::Vector2d p = mesh.node(node);
  return (side == Side::bottom || side == Side::top) ? p.x() : p.y();
}

}  // namespace

ElectrodeSetup locate_electrodes(const Mesh& mesh, std::span<const ElectrodeSpan> spans,
                                 std::span<const double> impedances) {
  if (spans.size() != impedances.size()) {
    throw std::invalid_argument("locate_electrodes: " + std::to_string(spans.size()) +
                                " spans but " + std::to_string(impedances.size()) + " impedances");
  }
  constexpr double kAlign = 1e-12;
  const double h = mesh.h();
  std::vector<Electrode> electrodes;
  for (std::size_t k = 0; k < spans.size(); ++k) {
    const ElectrodeSpan& span = spans[k];
    const auto idx = static_cast<Index>(k);
    if (!(impedances[k] > 0.0) || !std::isfinite(impedances[k])) {
      throw ElectrodeSpanError(idx, "z", "electrode " + std::to_string(k) +
                                             ": impedance must be positive");
    }
    if (!(span.lo >= -kAlign && span.hi <= 1.0 + kAlign && span.lo < span.hi)) {
      throw ElectrodeSpanError(idx, "interval", "electrode " + std::to_string(k) +
                                                    ": interval must satisfy 0 <= lo < hi <= 1");
    }
    for (double end : {span.lo, span.hi}) {
      const double grid = std::round(end / h) * h;
      if (std::abs(end - grid) > kAlign) {
        throw ElectrodeSpanError(idx, "interval", "electrode " + std::to_string(k) +
                                                      ": interval end " + std::to_string(end) +
                                                      " is not on a grid node");
      }
    }
    Electrode e{span.side, {}, impedances[k], 0.0};
    const auto& edges = mesh.boundary_edges();
    for (std::size_t b = 0; b < edges.size(); ++b) {
      if (edges[b].side != span.side) continue;
      const double a0 = along(mesh, span.side, edges[b].nodes[0]);
      const double a1 = along(mesh, span.side, edges[b].nodes[1]);
      if (a0 >= span.lo - kAlign && a1 <= span.hi + kAlign) {
        e.edges.push_back(static_cast<Index>(b));
        e.length += h;
      }
    }
    for (std::size_t prev = 0; prev < electrodes.size(); ++prev) {
      for (Index edge : e.edges) {
        if (std::find(electrodes[prev].edges.begin(), electrodes[prev].edges.end(), edge) !=
            electrodes[prev].edges.end()) {
          throw ElectrodeSpanError(idx, "interval", "electrode " + std::to_string(k) +
                                                        " overlaps electrode " +
                                                        std::to_string(prev));
        }
      }
    }
    electrodes.push_back(std::move(e));
  }
  return ElectrodeSetup(std::move(electrodes));
}

void write_mesh_csv(std::ostream& out, const Mesh& mesh) {
  char buf[96];
  out << "# mesh nodes,1,node\nid,x,y\n";
  for (Index v = 0; v < mesh.node_count(); ++v) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g\n", static_cast<long>(v), mesh.nodes()(v, 0),
                  mesh.nodes()(v, 1));
    out << buf;
  }
  out << "# mesh triangles,1,triangle\nid,v0,v1,v2\n";
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    const auto tri = mesh.triangles().row(t);
    out << t << ',' << tri(0) << ',' << tri(1) << ',' << tri(2) << '\n';
  }
}

}  // namespace cdii

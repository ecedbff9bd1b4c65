#pragma once

#include "cdii/calibration.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace cdii {

/// First line of every field file: "# quantity,unit,entity".
struct FieldHeader {
  std::string quantity;
  std::string unit;
  std::string entity;  // triangle | node | electrode | breakpoint
};

/// Parsed field file: one row per entity, id column stripped.
struct FieldTable {
  FieldHeader header;
  std::vector<Index> ids;
  Eigen::MatrixXd values;  // rows = entities, cols = components
};

/// 17 significant digits, so values round-trip exactly.
std::string format_double(double value);

void write_field(std::ostream& out, const FieldHeader& header, const Eigen::MatrixXd& values);
/// Throws std::runtime_error on malformed input.
FieldTable read_field(std::istream& in);

void write_field_file(const std::filesystem::path& path, const FieldHeader& header,
                      const Eigen::MatrixXd& values);
FieldTable read_field_file(const std::filesystem::path& path);

/// Same as read_field_file, requiring a single value column with ids 0..n-1.
Eigen::VectorXd read_scalar_field(const std::filesystem::path& path, const std::string& entity);

/// "# phi,V,breakpoint" then s,t rows.
void write_phi_csv(std::ostream& out, const PhiMap& phi);

/// "# u_trace,V,node" then node_id,u rows.
void write_trace_csv(std::ostream& out, const BoundaryVoltageTrace& trace);
BoundaryVoltageTrace read_trace_csv(std::istream& in, Side side);

/// Column header, then iteration,G_a,max_grad_diff,wall_time_ms rows.
void write_convergence_csv(std::ostream& out, const std::vector<IterationRecord>& log);

}  // namespace cdii

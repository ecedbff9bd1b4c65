#include "cdii/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cdii {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream ss(line);
  while (std::getline(ss, item, sep)) parts.push_back(item);
  if (!line.empty() && line.back() == sep) parts.emplace_back();
  return parts;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, std::size_t line_no) {
  const std::string t = trim(text);
  if (t == "nan") return std::nan("");
  double value = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": bad number '" + t + "'");
  }
  return value;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_field(std::ostream& out, const FieldHeader& header, const Eigen::MatrixXd& values) {
  out << "# " << header.quantity << ',' << header.unit << ',' << header.entity << '\n';
  for (Index r = 0; r < values.rows(); ++r) {
    out << r;
    for (Index c = 0; c < values.cols(); ++c) out << ',' << format_double(values(r, c));
    out << '\n';
  }
}

FieldTable read_field(std::istream& in) {
  FieldTable table;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw std::runtime_error("missing '# quantity,unit,entity' header");
  }
  const auto head = split(line.substr(2), ',');
  if (head.size() != 3) throw std::runtime_error("header must have three fields");
  table.header = {trim(head[0]), trim(head[1]), trim(head[2])};

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto parts = split(line, ',');
    if (parts.size() < 2) throw std::runtime_error("line " + std::to_string(line_no) + ": too few columns");
    if (!rows.empty() && parts.size() - 1 != rows.front().size()) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": inconsistent column count");
    }
    table.ids.push_back(static_cast<Index>(parse_number(parts[0], line_no)));
    std::vector<double> row;
    for (std::size_t c = 1; c < parts.size(); ++c) row.push_back(parse_number(parts[c], line_no));
    rows.push_back(std::move(row));
  }
  const Index cols = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
  table.values.resize(static_cast<Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (Index c = 0; c < cols; ++c) table.values(static_cast<Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
  }
  return table;
}

void write_field_file(const std::filesystem::path& path, const FieldHeader& header,
                      const Eigen::MatrixXd& values) {
  auto out = open_out(path);
  write_field(out, header, values);
}

FieldTable read_field_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  try {
    return read_field(in);
  } catch (const std::runtime_error& err) {
    throw std::runtime_error(path.string() + ": " + err.what());
  }
}

Eigen::VectorXd read_scalar_field(const std::filesystem::path& path, const std::string& entity) {
  FieldTable table = read_field_file(path);
  if (table.header.entity != entity) {
    throw std::runtime_error(path.string() + ": expected entity '" + entity + "', found '" +
                             table.header.entity + "'");
  }
  if (table.values.cols() != 1) throw std::runtime_error(path.string() + ": expected one value column");
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    if (table.ids[i] != static_cast<Index>(i)) {
      throw std::runtime_error(path.string() + ": ids must run 0..n-1");
    }
  }
  return table.values.col(0);
}

void write_phi_csv(std::ostream& out, const PhiMap& phi) {
  out << "# phi,V,breakpoint\n";
  for (std::size_t i = 0; i < phi.breakpoints().size(); ++i) {
    out << format_double(phi.breakpoints()[i]) << ',' << format_double(phi.values()[i]) << '\n';
  }
}

void write_trace_csv(std::ostream& out, const BoundaryVoltageTrace& trace) {
  out << "# u_trace,V,node\n";
  for (const auto& s : trace.samples()) out << s.node << ',' << format_double(s.u) << '\n';
}

BoundaryVoltageTrace read_trace_csv(std::istream& in, Side side) {
  FieldTable table = read_field(in);
  if (table.header.entity != "node" || table.values.cols() != 1) {
    throw std::runtime_error("trace must be a single-valued node field");
  }
  std::vector<TraceSample> samples;
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    samples.push_back({table.ids[i], table.values(static_cast<Index>(i), 0)});
  }
  return BoundaryVoltageTrace(side, std::move(samples));
}

void write_convergence_csv(std::ostream& out, const std::vector<IterationRecord>& log) {
  out << "iteration,G_a,max_grad_diff,wall_time_ms\n";
  for (const auto& r : log) {
    out << r.iteration << ',' << format_double(r.G_a) << ',' << format_double(r.max_grad_diff) << ','
        << format_double(r.wall_time_ms) << '\n';
  }
}

}  // namespace cdii

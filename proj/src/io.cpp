#include "stlab/harness/io.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace stlab::harness {

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt(std::optional<double> x) { return x ? fmt(*x) : std::string(); }
std::string fmt(long long x) { return std::to_string(x); }
std::string fmt(int x) { return std::to_string(x); }
std::string fmt(std::uint64_t x) { return std::to_string(x); }
std::string fmt(bool x) { return x ? "true" : "false"; }
std::string fmt(const std::string& s) { return s; }
std::string fmt(const char* s) { return s; }

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size())
    throw DimensionError("Table::add_row: " + std::to_string(row.size()) + " cells for " +
                         std::to_string(columns.size()) + " columns in '" + kind + "'");
  rows.push_back(std::move(row));
}

int Table::column(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  throw DomainError("Table: no column '" + name + "' in '" + kind + "'");
}

const std::string& Table::at(size_t row, const std::string& name) const {
  return rows.at(row).at(column(name));
}

double Table::number(size_t row, const std::string& name) const {
  const auto& s = at(row, name);
  if (s.empty()) return std::nan("");
  return std::stod(s);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

nlohmann::ordered_json json_cell(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  if (!s.empty() && s != "nan" && s != "inf" && s != "-inf") {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() + s.size()) return v;
  }
  return s;
}

}  // namespace

std::string to_csv(const Table& t) {
  std::string out;
  for (size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + csv_field(t.columns[i]);
  out += "\r\n";
  for (const auto& r : t.rows) {
    for (size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + csv_field(r[i]);
    out += "\r\n";
  }
  return out;
}

std::string to_json(const Table& t) {
  nlohmann::ordered_json j;
  j["kind"] = t.kind;
  j["columns"] = t.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : t.rows) {
    nlohmann::ordered_json o;
    for (size_t i = 0; i < r.size(); ++i) o[t.columns[i]] = json_cell(r[i]);
    rows.push_back(std::move(o));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string render(const Table& t, const std::string& format) {
  if (format == "csv") return to_csv(t);
  if (format == "json") return to_json(t);
  throw DomainError("render: unknown format '" + format + "'");
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_file: cannot open '" + path + "'");
  out << content;
  if (!out) throw Error("write_file: write failed for '" + path + "'");
}

std::string triple_json(const SpaceTriple<double>& t) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(t.kind());
  j["label"] = t.label();
  j["dim"] = t.dim();
  if (t.kind() == TripleKind::p1_fem_dirichlet) {
    j["n_cells"] = static_cast<int>(t.params()[0]);
    j["length"] = t.params()[1];
  } else {
    j["eigenvalues"] = t.params();
  }
  return j.dump();
}

namespace {

std::vector<std::string> coefficient_columns(std::vector<std::string> head, int dim) {
  for (int i = 0; i < dim; ++i) head.push_back("c" + std::to_string(i));
  return head;
}

}  // namespace

Table solution_table(const ThetaSolution<double>& s) {
  Table t{"theta-solution", coefficient_columns({"node", "t"}, s.dim()), {}};
  for (int m = 0; m <= s.grid.N; ++m) {
    std::vector<std::string> r{fmt(m), fmt(s.grid.node(m))};
    for (int i = 0; i < s.dim(); ++i) r.push_back(fmt(s.w(i, m)));
    t.add_row(std::move(r));
  }
  return t;
}

Table solution_table(const DgSolution<double>& s) {
  Table t{"dg-solution", coefficient_columns({"slab", "basis"}, s.dim()), {}};
  std::vector<std::string> r0{fmt(-1), fmt(0)};
  for (int i = 0; i < s.dim(); ++i) r0.push_back(fmt(s.w0()(i)));
  t.add_row(std::move(r0));
  for (int m = 0; m < s.grid.N; ++m) {
    for (int b = 0; b <= s.q; ++b) {
      std::vector<std::string> r{fmt(m), fmt(b)};
      for (int i = 0; i < s.dim(); ++i) r.push_back(fmt(s.coeff(m, b)(i)));
      t.add_row(std::move(r));
    }
  }
  return t;
}

std::string solution_header_json(const ThetaSolution<double>& s, const SpaceTriple<double>& t,
                                 const ContractionMap<double>& phi) {
  nlohmann::ordered_json j;
  j["scheme"] = "theta";
  j["theta"] = s.theta;
  j["N"] = s.grid.N;
  j["T"] = s.grid.T;
  j["triple"] = nlohmann::ordered_json::parse(triple_json(t));
  j["phi"] = phi.describe();
  return j.dump(2) + "\n";
}

std::string solution_header_json(const DgSolution<double>& s, const SpaceTriple<double>& t,
                                 const ContractionMap<double>& phi) {
  nlohmann::ordered_json j;
  j["scheme"] = "dg";
  j["q"] = s.q;
  j["N"] = s.grid.N;
  j["T"] = s.grid.T;
  j["triple"] = nlohmann::ordered_json::parse(triple_json(t));
  j["phi"] = phi.describe();
  return j.dump(2) + "\n";
}

std::vector<std::string> bundle_columns() {
  return {"err_vprime", "err_v",         "err_sup_h",    "err_trace0",  "err_traceT",
          "err_z",      "sup_method",    "time_points",  "subdivisions", "sup_samples",
          "reference"};
}

std::vector<std::string> bundle_cells(const NormBundle<double>& b) {
  return {fmt(b.vprime_deriv),       fmt(b.v_norm),       fmt(b.sup_h),
          fmt(b.trace0),             fmt(b.traceT),       fmt(b.z_surrogate),
          b.meta.sup_method,         fmt(b.meta.time_points), fmt(b.meta.subdivisions),
          fmt(b.meta.sup_samples),   b.meta.reference};
}

std::string bundle_json(const NormBundle<double>& b) {
  nlohmann::ordered_json j;
  const auto cols = bundle_columns();
  const auto cells = bundle_cells(b);
  for (size_t i = 0; i < cols.size(); ++i) j[cols[i]] = json_cell(cells[i]);
  return j.dump();
}

}  // namespace stlab::harness

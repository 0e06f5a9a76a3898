#pragma once

#include "stlab/stlab.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stlab::harness {

/// Text rendering of a double with 17 significant digits; NaN prints as
/// "nan" and infinities as "inf"/"-inf".
std::string fmt(double x);
std::string fmt(std::optional<double> x);  // empty when absent
std::string fmt(long long x);
std::string fmt(int x);
std::string fmt(std::uint64_t x);
std::string fmt(bool x);
std::string fmt(const std::string& s);
std::string fmt(const char* s);

/// A table of string cells with a fixed column order.
struct Table {
  std::string kind;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  int column(const std::string& name) const;  // throws when missing
  const std::string& at(size_t row, const std::string& name) const;
  double number(size_t row, const std::string& name) const;
  size_t size() const { return rows.size(); }
};

/// RFC-4180: comma separated, CRLF line ends, fields quoted when they hold
/// a comma, quote, CR or LF.
std::string to_csv(const Table& t);
/// {"kind": ..., "columns": [...], "rows": [{col: value, ...}, ...]}; cells
/// that parse fully as numbers are emitted as JSON numbers.
std::string to_json(const Table& t);
std::string render(const Table& t, const std::string& format);

void write_file(const std::string& path, const std::string& content);

// Serialization of the numerical objects.

std::string triple_json(const SpaceTriple<double>& t);
/// One row per node: node index, t, coefficient values.
Table solution_table(const ThetaSolution<double>& s);
/// One row per (slab, basis index); slab -1 holds w0.
Table solution_table(const DgSolution<double>& s);
std::string solution_header_json(const ThetaSolution<double>& s, const SpaceTriple<double>& t,
                                 const ContractionMap<double>& phi);
std::string solution_header_json(const DgSolution<double>& s, const SpaceTriple<double>& t,
                                 const ContractionMap<double>& phi);

std::vector<std::string> bundle_columns();
std::vector<std::string> bundle_cells(const NormBundle<double>& b);
std::string bundle_json(const NormBundle<double>& b);

}  // namespace stlab::harness

#include "schatten/matrix_io.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "schatten/errors.hpp"

namespace schatten {

namespace {

using nlohmann::json;

std::string cell_context(Eigen::Index i, Eigen::Index j) {
  return "entries[" + std::to_string(i) + "][" + std::to_string(j) + "]";
}

}  // namespace

ParsedMatrix parse_matrix_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("matrix document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("matrix document: top level must be an object");
  if (!doc.contains("n") || !doc["n"].is_number_integer())
    throw ParseError("matrix document: field \"n\" must be an integer");
  const auto n = doc["n"].get<Eigen::Index>();
  if (n < 1 || n > kMaxDim)
    throw DimensionMismatch("matrix document: n = " + std::to_string(n) +
                            " outside [1, " + std::to_string(kMaxDim) + "]");
  if (!doc.contains("entries") || !doc["entries"].is_array())
    throw ParseError("matrix document: field \"entries\" must be an array");
  const json& rows = doc["entries"];
  if (static_cast<Eigen::Index>(rows.size()) != n)
    throw DimensionMismatch("matrix document: entries has " + std::to_string(rows.size()) +
                            " rows, n = " + std::to_string(n));
  ParsedMatrix out;
  out.matrix.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& row = rows[static_cast<size_t>(i)];
    if (!row.is_array()) throw ParseError("matrix document: entries rows must be arrays");
    if (static_cast<Eigen::Index>(row.size()) != n)
      throw DimensionMismatch("matrix document: row " + std::to_string(i) + " has " +
                              std::to_string(row.size()) + " cells, n = " + std::to_string(n));
    for (Eigen::Index j = 0; j < n; ++j) {
      const json& cell = row[static_cast<size_t>(j)];
      if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number() || !cell[1].is_number())
        throw ParseError("matrix document: " + cell_context(i, j) +
                         " must be a [re, im] number pair");
      out.matrix(i, j) = Complex(cell[0].get<double>(), cell[1].get<double>());
    }
  }
  if (doc.contains("label")) {
    if (!doc["label"].is_string())
      throw ParseError("matrix document: field \"label\" must be a string");
    out.label = doc["label"].get<std::string>();
  }
  out.hermitian = is_hermitian(out.matrix);
  return out;
}

ParsedMatrix parse_matrix_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_matrix_text(buffer.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  } catch (const DimensionMismatch& e) {
    throw DimensionMismatch(path + ": " + e.what());
  }
}

std::string matrix_to_json(const Matrix& m, const std::string& label) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  json doc;
  doc["n"] = m.rows();
  doc["entries"] = std::move(rows);
  if (!label.empty()) doc["label"] = label;
  return doc.dump();
}

}  // namespace schatten

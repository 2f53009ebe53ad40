#pragma once

#include <string>

#include "schatten/matrix_core.hpp"

namespace schatten {

struct ParsedMatrix {
  Matrix matrix;
  std::string label;
  bool hermitian = false;
};

// Matrix document: UTF-8 JSON {"n": int, "entries": [[[re, im], ...], ...],
// "label": optional string}, entries row-major. Malformed documents raise
// ParseError with field context; shape violations raise DimensionMismatch.
// The hermitian flag records whether the parsed matrix passes the
// symmetrization check; parsing itself accepts any square complex matrix.
ParsedMatrix parse_matrix_text(const std::string& text);
ParsedMatrix parse_matrix_file(const std::string& path);

// Serializes in the same schema; label omitted when empty.
std::string matrix_to_json(const Matrix& m, const std::string& label = "");

}  // namespace schatten

#pragma once

// Dense matrix files.
//
// CSV:  one row per line, comma-separated decimals (17 significant digits on
//       write), no header.
// BPLM: bytes 'B' 'P' 'L' 'M', rows (u64 LE), cols (u64 LE), then rows*cols
//       IEEE-754 binary64 LE values in row-major order. Nothing else.

#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "bpalm/linalg.hpp"

namespace bpalm::io {

enum class MatrixFormat { Csv, Bplm };

MatrixFormat parse_format(std::string_view name);

void write_csv(std::ostream& out, const Matrix& m);
Matrix read_csv(std::istream& in);
void write_bplm(std::ostream& out, const Matrix& m);
Matrix read_bplm(std::istream& in);

void write_matrix(const std::filesystem::path& path, const Matrix& m, MatrixFormat format);
/// Detects BPLM by its magic bytes, otherwise parses CSV.
Matrix read_matrix(const std::filesystem::path& path);

}  // namespace bpalm::io

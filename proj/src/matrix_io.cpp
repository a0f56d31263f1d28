#include "bpalm/matrix_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bpalm/errors.hpp"

namespace bpalm::io {
namespace {

constexpr std::array<char, 4> kMagic{'B', 'P', 'L', 'M'};

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xFF);
  out.write(b.data(), 8);
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int k = 7; k >= 0; --k) v = (v << 8) | p[k];
  return v;
}

void put_f64(std::ostream& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }

}  // namespace

MatrixFormat parse_format(std::string_view name) {
  if (name == "csv") return MatrixFormat::Csv;
  if (name == "bplm") return MatrixFormat::Bplm;
  fail(ErrorKind::Config, "unknown matrix format '" + std::string(name) + "' (csv|bplm)");
}

void write_csv(std::ostream& out, const Matrix& m) {
  char buf[40];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

Matrix read_csv(std::istream& in) {
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t count = 0;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const char* begin = cell.c_str();
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      while (end && (*end == ' ' || *end == '\t')) ++end;
      require(end != begin && *end == '\0', ErrorKind::Io,
              "csv row " + std::to_string(rows + 1) + ": cannot parse '" + cell + "'");
      require(std::isfinite(v), ErrorKind::Io,
              "csv row " + std::to_string(rows + 1) + ": non-finite value");
      values.push_back(v);
      ++count;
    }
    if (rows == 0) cols = count;
    require(count == cols && count > 0, ErrorKind::Io,
            "csv row " + std::to_string(rows + 1) + " has " + std::to_string(count) +
                " values, expected " + std::to_string(cols));
    ++rows;
  }
  require(rows > 0, ErrorKind::Io, "csv input holds no rows");
  return Matrix(rows, cols, std::move(values));
}

void write_bplm(std::ostream& out, const Matrix& m) {
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, m.rows());
  put_u64(out, m.cols());
  for (double v : m.values()) put_f64(out, v);
}

Matrix read_bplm(std::istream& in) {
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(bytes.size() >= 20 && std::memcmp(bytes.data(), kMagic.data(), 4) == 0, ErrorKind::Io,
          "not a BPLM file (bad magic or truncated header)");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint64_t rows = get_u64(p + 4);
  const std::uint64_t cols = get_u64(p + 12);
  require(cols == 0 || rows <= (UINT64_MAX - 20) / 8 / cols, ErrorKind::Io,
          "BPLM dimensions overflow");
  require(bytes.size() == 20 + 8 * rows * cols, ErrorKind::Io,
          "BPLM length " + std::to_string(bytes.size()) + " does not match " +
              std::to_string(rows) + "x" + std::to_string(cols));
  std::vector<double> values(rows * cols);
  for (std::size_t k = 0; k < values.size(); ++k) {
    values[k] = std::bit_cast<double>(get_u64(p + 20 + 8 * k));
    require(std::isfinite(values[k]), ErrorKind::Io, "BPLM holds a non-finite value");
  }
  return Matrix(rows, cols, std::move(values));
}

void write_matrix(const std::filesystem::path& path, const Matrix& m, MatrixFormat format) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  if (format == MatrixFormat::Csv)
    write_csv(out, m);
  else
    write_bplm(out, m);
  out.flush();
  require(static_cast<bool>(out), ErrorKind::Io, "write to '" + path.string() + "' failed");
}

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  std::array<char, 4> head{};
  in.read(head.data(), head.size());
  const bool binary = in.gcount() == 4 && head == kMagic;
  in.clear();
  in.seekg(0);
  try {
    return binary ? read_bplm(in) : read_csv(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace bpalm::io

#pragma once

#include <filesystem>
#include <string>

#include "maskopt/matrix.hpp"

namespace maskopt {

// Matrix file layout, little-endian throughout:
//   "MXF1" | rows: u64 | cols: u64 | rows*cols f64 in row-major order
// Masks use the same layout with 0.0/1.0 entries.
inline constexpr char kMatrixMagic[4] = {'M', 'X', 'F', '1'};

DenseMatrix load_matrix(const std::filesystem::path& path);
void save_matrix(const std::filesystem::path& path, const DenseMatrix& m);

// In-memory encode/decode of the same layout.
std::string encode_matrix(const DenseMatrix& m);
DenseMatrix decode_matrix(const std::string& bytes);

} // namespace maskopt

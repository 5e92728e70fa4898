#pragma once

// Binary matrix files.
//
//   offset  size  field
//        0     8  magic "STROMMAT"
//        8     4  version, u32 little-endian (= 1)
//       12     8  rows, u64 little-endian
//       20     8  cols, u64 little-endian
//       28  8*rc  entries, IEEE-754 binary64 little-endian, column-major
//
// The header is 28 bytes, so a file holds exactly 28 + 8 rows cols bytes.

#include <cstdint>
#include <filesystem>
#include <string>

#include "strom/linalg.hpp"

namespace strom {

inline constexpr char kMatrixMagic[8] = {'S', 'T', 'R', 'O', 'M', 'M', 'A', 'T'};
inline constexpr std::uint32_t kMatrixFormatVersion = 1;
inline constexpr std::size_t kMatrixHeaderBytes = 28;

/// Throws PreconditionError for an empty matrix or non-finite entries and
/// Error when the file cannot be written.
void write_matrix(const std::filesystem::path& path, const DenseMatrix& m);

/// Validates magic, version and the size implied by the header before
/// allocating; throws FormatError on any mismatch or non-finite entry.
DenseMatrix read_matrix(const std::filesystem::path& path);

/// The same encoding to and from memory.
std::string encode_matrix(const DenseMatrix& m);
DenseMatrix decode_matrix(std::string_view bytes, const std::string& origin = "<memory>");

}  // namespace strom

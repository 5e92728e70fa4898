#include "strom/persist.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "strom/error.hpp"

namespace strom {

namespace {

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
}

template <class T>
void put(std::string& out, T v) {
  const T le = to_little(v);
  char buf[sizeof(T)];
  std::memcpy(buf, &le, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get(std::string_view bytes, std::size_t offset) {
  T v;
  std::memcpy(&v, bytes.data() + offset, sizeof(T));
  return to_little(v);
}

void check_header(std::string_view header, std::uint64_t& rows, std::uint64_t& cols, const std::string& origin) {
  if (header.size() < kMatrixHeaderBytes) {
    std::ostringstream msg;
    msg << "read_matrix: " << origin << " is " << header.size() << " bytes, shorter than the "
        << kMatrixHeaderBytes << "-byte header";
    throw FormatError(msg.str());
  }
  if (std::memcmp(header.data(), kMatrixMagic, sizeof kMatrixMagic) != 0)
    throw FormatError("read_matrix: " + origin + " does not start with the STROMMAT magic");
  const auto version = get<std::uint32_t>(header, 8);
  if (version != kMatrixFormatVersion) {
    std::ostringstream msg;
    msg << "read_matrix: " << origin << " has format version " << version << ", expected " << kMatrixFormatVersion;
    throw FormatError(msg.str());
  }
  rows = get<std::uint64_t>(header, 12);
  cols = get<std::uint64_t>(header, 20);
  if (rows == 0 || cols == 0) throw FormatError("read_matrix: " + origin + " declares an empty matrix");
  constexpr std::uint64_t max_entries = std::numeric_limits<std::uint64_t>::max() / 8 - kMatrixHeaderBytes;
  if (rows > max_entries / cols) throw FormatError("read_matrix: " + origin + " declares an impossible size");
}

DenseMatrix decode_payload(std::string_view payload, std::uint64_t rows, std::uint64_t cols,
                           const std::string& origin) {
  DenseMatrix m(rows, cols);
  double* dst = m.data();
  for (std::size_t i = 0; i < rows * cols; ++i) {
    const double v = get<double>(payload, 8 * i);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "read_matrix: " << origin << " holds a non-finite entry at (" << i % rows << ", " << i / rows << ")";
      throw FormatError(msg.str());
    }
    dst[i] = v;
  }
  return m;
}

}  // namespace

std::string encode_matrix(const DenseMatrix& m) {
  if (m.empty()) throw PreconditionError("write_matrix: refusing to store an empty matrix");
  if (!all_finite(m.values())) throw PreconditionError("write_matrix: matrix has non-finite entries");
  std::string out;
  out.reserve(kMatrixHeaderBytes + 8 * m.size());
  out.append(kMatrixMagic, sizeof kMatrixMagic);
  put<std::uint32_t>(out, kMatrixFormatVersion);
  put<std::uint64_t>(out, m.rows());
  put<std::uint64_t>(out, m.cols());
  for (double v : m.values()) put<double>(out, v);
  return out;
}

DenseMatrix decode_matrix(std::string_view bytes, const std::string& origin) {
  std::uint64_t rows = 0, cols = 0;
  check_header(bytes, rows, cols, origin);
  const std::uint64_t expected = kMatrixHeaderBytes + 8 * rows * cols;
  if (bytes.size() != expected) {
    std::ostringstream msg;
    msg << "read_matrix: " << origin << " is " << bytes.size() << " bytes, header implies " << expected;
    throw FormatError(msg.str());
  }
  return decode_payload(bytes.substr(kMatrixHeaderBytes), rows, cols, origin);
}

void write_matrix(const std::filesystem::path& path, const DenseMatrix& m) {
  const std::string bytes = encode_matrix(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("write_matrix: cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw Error("write_matrix: write to " + path.string() + " failed");
}

DenseMatrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("read_matrix: cannot open " + path.string());
  const std::string origin = path.string();
  std::string header(kMatrixHeaderBytes, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header.size()));
  header.resize(static_cast<std::size_t>(in.gcount()));
  std::uint64_t rows = 0, cols = 0;
  check_header(header, rows, cols, origin);

  // compare against the real file size before allocating the payload
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  const std::uint64_t expected = kMatrixHeaderBytes + 8 * rows * cols;
  if (ec || size != expected) {
    std::ostringstream msg;
    msg << "read_matrix: " << origin << " is " << (ec ? 0 : size) << " bytes, header implies " << expected
        << (size < expected ? " (truncated)" : " (trailing bytes)");
    throw FormatError(msg.str());
  }
  std::string payload(8 * rows * cols, '\0');
  in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::uint64_t>(in.gcount()) != payload.size())
    throw FormatError("read_matrix: " + origin + " truncated while reading the payload");
  return decode_payload(payload, rows, cols, origin);
}

}  // namespace strom

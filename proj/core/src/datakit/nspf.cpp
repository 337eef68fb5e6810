#include "nsp/datakit/nspf.hpp"

#include "nsp/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace nsp::datakit {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[at + static_cast<std::size_t>(i)];
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_nspf(const Eigen::MatrixXd& m) {
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (m.rows() > kMax || m.cols() > kMax) {
    fail(ErrorKind::InvalidArgument, "encode_nspf: matrix too large");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kNspfHeaderSize + 4 * static_cast<std::size_t>(m.size()));
  for (char c : {'N', 'S', 'P', 'F'}) out.push_back(static_cast<std::uint8_t>(c));
  put_u16(out, kNspfVersion);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  put_u16(out, 0);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(m(i, j))));
    }
  }
  return out;
}

Eigen::MatrixXd decode_nspf(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kNspfHeaderSize) {
    throw CorruptFileError("NSPF header truncated: " + std::to_string(bytes.size()) + " bytes",
                           bytes.size());
  }
  if (std::memcmp(bytes.data(), "NSPF", 4) != 0) throw CorruptFileError("bad NSPF magic", 0);
  const std::uint16_t version = get_u16(bytes, 4);
  if (version != kNspfVersion) {
    throw CorruptFileError("unsupported NSPF version " + std::to_string(version), 4);
  }
  const std::uint32_t rows = get_u32(bytes, 6);
  const std::uint32_t cols = get_u32(bytes, 10);
  const std::size_t expected = kNspfHeaderSize + 4 * static_cast<std::size_t>(rows) * cols;
  if (bytes.size() < expected) {
    throw CorruptFileError("NSPF payload truncated: expected " + std::to_string(expected) +
                               " bytes for " + std::to_string(rows) + "x" + std::to_string(cols) +
                               ", found " + std::to_string(bytes.size()),
                           bytes.size());
  }
  if (bytes.size() > expected) {
    throw CorruptFileError("NSPF file has trailing bytes", expected);
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t at = kNspfHeaderSize;
  for (std::uint32_t i = 0; i < rows; ++i) {
    for (std::uint32_t j = 0; j < cols; ++j, at += 4) {
      m(i, j) = static_cast<double>(std::bit_cast<float>(get_u32(bytes, at)));
    }
  }
  return m;
}

void write_nspf(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  write_file_bytes(path, encode_nspf(m));
}

Eigen::MatrixXd read_nspf(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_nspf(bytes);
  } catch (const CorruptFileError& e) {
    throw CorruptFileError(path.string() + ": " + e.what(), e.offset());
  }
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::MissingArtifact, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return {bytes.begin(), bytes.end()};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace nsp::datakit

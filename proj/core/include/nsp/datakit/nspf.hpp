#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace nsp::datakit {

// NSPF matrix file, all integers little-endian:
//
//   offset  size  field
//   0       4     magic "NSPF"
//   4       2     version (u16, currently 1)
//   6       4     rows (u32)
//   10      4     cols (u32)
//   14      2     padding (zero)
//   16      4*r*c float32 payload, row-major
//
// Values are stored as float32, so a matrix of float-representable doubles
// round-trips bit-exactly.
inline constexpr std::uint16_t kNspfVersion = 1;
inline constexpr std::size_t kNspfHeaderSize = 16;

std::vector<std::uint8_t> encode_nspf(const Eigen::MatrixXd& m);

// Throws CorruptFileError with the offset where decoding failed.
Eigen::MatrixXd decode_nspf(std::span<const std::uint8_t> bytes);

void write_nspf(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_nspf(const std::filesystem::path& path);

// Raw file helpers shared by the datakit writers.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace nsp::datakit

#pragma once

#include "nsp/datakit/manifest.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace nsp::datakit {

enum class SplitPart { Train, Validation, Test };
std::string_view to_string(SplitPart p);
SplitPart parse_split_part(std::string_view text);

struct SplitCounts {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

// train = floor(0.64 N), test = floor(0.20 N), validation = the remainder.
// This rounding reproduces every per-class row of the 64/16/20 split table
// (e.g. 305 -> 195/49/61, 406 -> 259/66/81, 267 -> 170/44/53).
SplitCounts split_counts(std::size_t n);

struct ClassTrials {
  std::string label;
  std::vector<std::string> ids;
};

struct ClassSplit {
  std::string label;
  std::vector<std::string> train, validation, test;
};

struct SplitAssignment {
  std::vector<ClassSplit> classes;

  std::vector<std::string> ids(SplitPart part) const;
  // Throws IdMismatch for ids that are not assigned.
  SplitPart part_of(const std::string& id) const;

  KeyValueDoc to_doc() const;
  static SplitAssignment from_doc(const KeyValueDoc& doc);
};

// Per-class seeded shuffle, then the first split_counts(N).train ids go to
// training, the next `validation` to validation, the rest to test.
// Throws ClassTooSmall for classes with fewer than 5 trials.
SplitAssignment split_dataset(const std::vector<ClassTrials>& by_class, std::uint64_t seed);

// Groups a dataset's trials by vocabulary order.
std::vector<ClassTrials> group_by_class(const Dataset& ds);

}  // namespace nsp::datakit

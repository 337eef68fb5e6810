#pragma once

#include <string>
#include <vector>

namespace nsp::datakit {

// 31 data electrodes of a 32-electrode 10-20 cap (the remaining electrode is
// ground), in recording order.
const std::vector<std::string>& standard_channel_labels();

// First `n` standard labels; beyond 31 the extra channels are named "Ch32"...
std::vector<std::string> channel_labels(int n);

// Temporal/parietal subset used for the reduced-montage experiments.
const std::vector<std::string>& four_channel_subset();

}  // namespace nsp::datakit

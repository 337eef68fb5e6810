#include "nsp/datakit/channels.hpp"

namespace nsp::datakit {

const std::vector<std::string>& standard_channel_labels() {
  static const std::vector<std::string> labels{
      "Fp1", "Fp2", "F3",  "F4",  "C3",  "C4",  "P3",  "P4",  "O1",  "O2",  "F7",
      "F8",  "T7",  "T8",  "P7",  "P8",  "Fz",  "Cz",  "Pz",  "Oz",  "FC1", "FC2",
      "CP1", "CP2", "FC5", "FC6", "CP5", "CP6", "TP9", "TP10", "POz"};
  return labels;
}

std::vector<std::string> channel_labels(int n) {
  const auto& std_labels = standard_channel_labels();
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) {
    if (i < static_cast<int>(std_labels.size())) {
      out.push_back(std_labels[static_cast<std::size_t>(i)]);
    } else {
      out.push_back("Ch" + std::to_string(i + 1));
    }
  }
  return out;
}

const std::vector<std::string>& four_channel_subset() {
  static const std::vector<std::string> subset{"T7", "T8", "FC5", "P7"};
  return subset;
}

}  // namespace nsp::datakit

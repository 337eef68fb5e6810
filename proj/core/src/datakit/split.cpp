#include "nsp/datakit/split.hpp"

#include "nsp/errors.hpp"
#include "nsp/rng.hpp"

namespace nsp::datakit {

std::string_view to_string(SplitPart p) {
  switch (p) {
    case SplitPart::Train: return "train";
    case SplitPart::Validation: return "validation";
    case SplitPart::Test: return "test";
  }
  return "?";
}

SplitPart parse_split_part(std::string_view text) {
  if (text == "train") return SplitPart::Train;
  if (text == "validation") return SplitPart::Validation;
  if (text == "test") return SplitPart::Test;
  fail(ErrorKind::InvalidArgument, "unknown split '" + std::string(text) + "'");
}

SplitCounts split_counts(std::size_t n) {
  SplitCounts c;
  c.train = n * 64 / 100;
  c.test = n * 20 / 100;
  c.validation = n - c.train - c.test;
  return c;
}

std::vector<std::string> SplitAssignment::ids(SplitPart part) const {
  std::vector<std::string> out;
  for (const auto& c : classes) {
    const auto& src = part == SplitPart::Train        ? c.train
                      : part == SplitPart::Validation ? c.validation
                                                      : c.test;
    out.insert(out.end(), src.begin(), src.end());
  }
  return out;
}

SplitPart SplitAssignment::part_of(const std::string& id) const {
  for (const auto& c : classes) {
    for (const auto& x : c.train) if (x == id) return SplitPart::Train;
    for (const auto& x : c.validation) if (x == id) return SplitPart::Validation;
    for (const auto& x : c.test) if (x == id) return SplitPart::Test;
  }
  fail(ErrorKind::IdMismatch, "trial '" + id + "' has no split assignment");
}

KeyValueDoc SplitAssignment::to_doc() const {
  KeyValueDoc doc;
  for (const auto& c : classes) {
    doc.set("class." + c.label + ".train", join_list(c.train));
    doc.set("class." + c.label + ".validation", join_list(c.validation));
    doc.set("class." + c.label + ".test", join_list(c.test));
  }
  return doc;
}

SplitAssignment SplitAssignment::from_doc(const KeyValueDoc& doc) {
  SplitAssignment s;
  for (const auto& [key, value] : doc.entries()) {
    const auto last_dot = key.rfind('.');
    if (key.rfind("class.", 0) != 0 || last_dot == std::string::npos || last_dot <= 6) {
      fail(ErrorKind::InvalidArgument, "split file: unexpected key '" + key + "'");
    }
    const std::string label = key.substr(6, last_dot - 6);
    const SplitPart part = parse_split_part(key.substr(last_dot + 1));
    if (s.classes.empty() || s.classes.back().label != label) s.classes.push_back({label, {}, {}, {}});
    auto& cls = s.classes.back();
    auto& dst = part == SplitPart::Train ? cls.train : part == SplitPart::Validation ? cls.validation : cls.test;
    dst = split_list(value);
  }
  return s;
}

SplitAssignment split_dataset(const std::vector<ClassTrials>& by_class, std::uint64_t seed) {
  SplitAssignment out;
  for (const auto& cls : by_class) {
    if (cls.ids.size() < 5) {
      fail(ErrorKind::ClassTooSmall, "class '" + cls.label + "' has " +
                                         std::to_string(cls.ids.size()) + " trials; need at least 5");
    }
    std::vector<std::string> ids = cls.ids;
    Rng rng(derive_seed(seed, "split/" + cls.label));
    shuffle(ids, rng);
    const SplitCounts n = split_counts(ids.size());
    ClassSplit cs;
    cs.label = cls.label;
    const auto train_end = ids.begin() + static_cast<std::ptrdiff_t>(n.train);
    const auto val_end = train_end + static_cast<std::ptrdiff_t>(n.validation);
    cs.train.assign(ids.begin(), train_end);
    cs.validation.assign(train_end, val_end);
    cs.test.assign(val_end, ids.end());
    out.classes.push_back(std::move(cs));
  }
  return out;
}

std::vector<ClassTrials> group_by_class(const Dataset& ds) {
  std::vector<ClassTrials> out;
  for (const auto& label : ds.info.vocabulary) out.push_back({label, {}});
  for (const auto& t : ds.trials) {
    out[static_cast<std::size_t>(ds.info.label_index(t.label))].ids.push_back(t.id);
  }
  return out;
}

}  // namespace nsp::datakit

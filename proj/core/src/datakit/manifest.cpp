#include "nsp/datakit/manifest.hpp"

#include "nsp/datakit/nspf.hpp"
#include "nsp/errors.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace nsp::datakit {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

KeyValueDoc KeyValueDoc::parse(std::string_view text) {
  KeyValueDoc doc;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos || colon == 0) {
      fail(ErrorKind::InvalidArgument, "manifest line " + std::to_string(line_no) +
                                           ": expected 'key: value'");
    }
    const std::string key(trim(line.substr(0, colon)));
    if (doc.has(key)) {
      fail(ErrorKind::InvalidArgument, "manifest line " + std::to_string(line_no) +
                                           ": duplicate key '" + key + "'");
    }
    doc.entries_.emplace_back(key, std::string(trim(line.substr(colon + 1))));
  }
  return doc;
}

KeyValueDoc KeyValueDoc::load(const std::filesystem::path& path) {
  return parse(read_text_file(path));
}

std::string KeyValueDoc::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    out += k;
    out += ": ";
    out += v;
    out += '\n';
  }
  return out;
}

void KeyValueDoc::save(const std::filesystem::path& path) const { write_text_file(path, to_text()); }

void KeyValueDoc::set(std::string key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
}

bool KeyValueDoc::has(std::string_view key) const { return find(key).has_value(); }

std::optional<std::string> KeyValueDoc::find(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

const std::string& KeyValueDoc::get(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  fail(ErrorKind::InvalidArgument, "manifest is missing key '" + std::string(key) + "'");
}

double KeyValueDoc::get_double(std::string_view key) const {
  const std::string& v = get(key);
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::InvalidArgument, "manifest key '" + std::string(key) + "' is not a number: '" + v + "'");
}

long long KeyValueDoc::get_int(std::string_view key) const {
  const std::string& v = get(key);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    fail(ErrorKind::InvalidArgument, "manifest key '" + std::string(key) + "' is not an integer: '" + v + "'");
  }
  return out;
}

std::vector<std::string> KeyValueDoc::get_list(std::string_view key) const {
  return split_list(get(key));
}

std::vector<std::string> split_list(std::string_view text, char sep) {
  std::vector<std::string> out;
  text = trim(text);
  if (text.empty()) return out;
  while (true) {
    const auto pos = text.find(sep);
    out.emplace_back(trim(text.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    text = text.substr(pos + 1);
  }
  return out;
}

std::string join_list(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string_view to_string(Condition c) { return c == Condition::Clean ? "clean" : "noisy"; }

Condition parse_condition(std::string_view text) {
  if (text == "clean") return Condition::Clean;
  if (text == "noisy") return Condition::Noisy;
  fail(ErrorKind::InvalidArgument, "unknown noise condition '" + std::string(text) + "'");
}

KeyValueDoc TrialManifest::to_doc() const {
  KeyValueDoc doc;
  doc.set("id", id);
  doc.set("label", label);
  doc.set("condition", std::string(to_string(condition)));
  doc.set("eeg_path", eeg_path);
  doc.set("audio_path", audio_path);
  doc.set("eeg_rate_hz", format_double(eeg_rate_hz));
  doc.set("audio_rate_hz", format_double(audio_rate_hz));
  doc.set("channel_count", std::to_string(channels.size()));
  doc.set("channels", join_list(channels));
  return doc;
}

TrialManifest TrialManifest::from_doc(const KeyValueDoc& doc) {
  TrialManifest m;
  m.id = doc.get("id");
  m.label = doc.get("label");
  m.condition = parse_condition(doc.get("condition"));
  m.eeg_path = doc.get("eeg_path");
  m.audio_path = doc.get("audio_path");
  m.eeg_rate_hz = doc.get_double("eeg_rate_hz");
  m.audio_rate_hz = doc.get_double("audio_rate_hz");
  m.channels = doc.get_list("channels");
  if (doc.has("channel_count") &&
      doc.get_int("channel_count") != static_cast<long long>(m.channels.size())) {
    fail(ErrorKind::ShapeMismatch, "trial '" + m.id + "': channel_count disagrees with channel list");
  }
  return m;
}

TrialSignals load_trial(const std::filesystem::path& dataset_dir, const TrialManifest& m) {
  TrialSignals s;
  s.eeg.data = read_nspf(dataset_dir / m.eeg_path);
  s.eeg.sample_rate_hz = m.eeg_rate_hz;
  s.audio.data = read_nspf(dataset_dir / m.audio_path);
  s.audio.sample_rate_hz = m.audio_rate_hz;
  if (s.eeg.data.cols() != static_cast<Eigen::Index>(m.channels.size())) {
    fail(ErrorKind::ShapeMismatch, "trial '" + m.id + "': manifest lists " +
                                       std::to_string(m.channels.size()) + " channels, EEG file has " +
                                       std::to_string(s.eeg.data.cols()) + " columns");
  }
  if (s.audio.data.cols() != 1) {
    fail(ErrorKind::ShapeMismatch, "trial '" + m.id + "': audio must have one column");
  }
  return s;
}

void save_trial(const std::filesystem::path& dataset_dir, const TrialManifest& m,
                const TrialSignals& s) {
  if (s.eeg.data.cols() != static_cast<Eigen::Index>(m.channels.size())) {
    fail(ErrorKind::ShapeMismatch, "save_trial: channel list does not match EEG columns");
  }
  write_nspf(dataset_dir / m.eeg_path, s.eeg.data);
  write_nspf(dataset_dir / m.audio_path, s.audio.data);
  m.to_doc().save(trial_manifest_path(dataset_dir, m.id));
}

int DatasetManifest::label_index(std::string_view label) const {
  const auto it = std::find(vocabulary.begin(), vocabulary.end(), label);
  if (it == vocabulary.end()) {
    fail(ErrorKind::InvalidArgument, "label '" + std::string(label) + "' is not in the vocabulary");
  }
  return static_cast<int>(it - vocabulary.begin());
}

KeyValueDoc DatasetManifest::to_doc() const {
  KeyValueDoc doc;
  doc.set("format", "nsp-dataset-1");
  doc.set("tag", tag);
  doc.set("condition", std::string(to_string(condition)));
  doc.set("vocabulary", join_list(vocabulary));
  for (const auto& [k, v] : extra) doc.set(k, v);
  doc.set("trial_count", std::to_string(trial_ids.size()));
  doc.set("trials", join_list(trial_ids));
  return doc;
}

DatasetManifest DatasetManifest::from_doc(const KeyValueDoc& doc) {
  DatasetManifest d;
  d.tag = doc.get("tag");
  d.condition = parse_condition(doc.get("condition"));
  d.vocabulary = doc.get_list("vocabulary");
  d.trial_ids = doc.get_list("trials");
  if (doc.get_int("trial_count") != static_cast<long long>(d.trial_ids.size())) {
    fail(ErrorKind::ShapeMismatch, "dataset manifest: trial_count disagrees with trial list");
  }
  static const std::vector<std::string> kKnown{"format", "tag", "condition", "vocabulary",
                                               "trial_count", "trials"};
  for (const auto& [k, v] : doc.entries()) {
    if (std::find(kKnown.begin(), kKnown.end(), k) == kKnown.end()) d.extra.emplace_back(k, v);
  }
  return d;
}

std::filesystem::path trial_manifest_path(const std::filesystem::path& dataset_dir,
                                          std::string_view id) {
  return dataset_dir / "trials" / (std::string(id) + ".manifest");
}

Dataset load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    fail(ErrorKind::MissingArtifact, "dataset directory '" + dir.string() + "' does not exist");
  }
  const auto index = dir / kDatasetManifestName;
  if (!std::filesystem::exists(index)) {
    fail(ErrorKind::MissingArtifact, "no " + std::string(kDatasetManifestName) + " in '" + dir.string() + "'");
  }
  Dataset ds;
  ds.dir = dir;
  ds.info = DatasetManifest::from_doc(KeyValueDoc::load(index));
  ds.trials.reserve(ds.info.trial_ids.size());
  for (const auto& id : ds.info.trial_ids) {
    ds.trials.push_back(TrialManifest::from_doc(KeyValueDoc::load(trial_manifest_path(dir, id))));
    ds.info.label_index(ds.trials.back().label);
  }
  return ds;
}

}  // namespace nsp::datakit

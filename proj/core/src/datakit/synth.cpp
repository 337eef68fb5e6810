#include "nsp/datakit/synth.hpp"

#include "nsp/datakit/channels.hpp"
#include "nsp/errors.hpp"
#include "nsp/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace nsp::datakit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMainsHz = 60.0;
constexpr double kMainsAmplitude = 0.3;
constexpr double kFormantBandwidthHz = 90.0;
constexpr double kVoiceCeilingHz = 5000.0;
constexpr double kNoteSeconds = 0.125;
constexpr double kFormantJitter = 0.08;
constexpr double kRampSeconds = 0.02;
constexpr int kTalkersPerSegment = 3;

struct Formants {
  double f1;
  double f2;
};

// Two-formant envelopes, loosely after English vowel charts.
const std::vector<Formants>& formant_table() {
  static const std::vector<Formants> table{{700, 1150}, {400, 1900}, {300, 850},
                                           {550, 2400}, {250, 2200}, {600, 1600},
                                           {450, 1000}, {350, 1400}, {650, 2000}};
  return table;
}

const std::vector<double>& frequency_table() {
  static const std::vector<double> table{6, 11, 17, 23, 29, 35, 41, 47, 53};
  return table;
}

bool iequals(const std::string& a, const std::string& b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](char x, char y) {
    return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
  });
}

double power_of(const Eigen::VectorXd& v) { return v.squaredNorm() / static_cast<double>(v.size()); }

// Mean power over the samples where the signal is non-zero.
double active_power(const Eigen::VectorXd& v) {
  Eigen::Index active = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) active += v(i) != 0.0 ? 1 : 0;
  return active == 0 ? 0.0 : v.squaredNorm() / static_cast<double>(active);
}

// A voiced "word": harmonic complex shaped by two class-specific formant
// peaks, active for 35-60% of the trial with raised-cosine on/off ramps.
Eigen::VectorXd voiced_speech(const SyntheticSpec& spec, int label_index, Rng& rng, Eigen::Index n) {
  const Formants base = formant_table()[static_cast<std::size_t>(label_index) % formant_table().size()];
  const double f1 = base.f1 * rng.uniform(1.0 - kFormantJitter, 1.0 + kFormantJitter);
  const double f2 = base.f2 * rng.uniform(1.0 - kFormantJitter, 1.0 + kFormantJitter);
  const double f0 = rng.uniform(100.0, 150.0);
  const auto len = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(rng.uniform(0.35, 0.6) * static_cast<double>(n)));
  const auto onset = static_cast<Eigen::Index>(rng.uniform(0.6, 1.0) * static_cast<double>(n - len));
  const auto ramp = std::min<Eigen::Index>(len / 2, static_cast<Eigen::Index>(kRampSeconds * spec.audio_rate_hz));

  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int k = 1; k * f0 < kVoiceCeilingHz; ++k) {
    const double f = k * f0;
    const double d1 = (f - f1) / kFormantBandwidthHz;
    const double d2 = (f - f2) / kFormantBandwidthHz;
    const double amp = 1.0 / (1.0 + d1 * d1) + 0.7 / (1.0 + d2 * d2) + 0.01;
    const double phase = rng.uniform(0.0, kTwoPi);
    const double w = kTwoPi * f / spec.audio_rate_hz;
    for (Eigen::Index i = 0; i < len; ++i) out(onset + i) += amp * std::sin(w * static_cast<double>(i) + phase);
  }
  for (Eigen::Index i = 0; i < ramp; ++i) {
    const double g = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / static_cast<double>(ramp));
    out(onset + i) *= g;
    out(onset + len - 1 - i) *= g;
  }
  return out;
}

// Babble: in every 125 ms segment a few interfering talkers, each a
// harmonic complex with a random vowel envelope, plus a white floor.
Eigen::VectorXd background_babble(const SyntheticSpec& spec, Rng& rng, Eigen::Index n) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  const auto seg_len = static_cast<Eigen::Index>(kNoteSeconds * spec.audio_rate_hz);
  const auto& table = formant_table();
  for (Eigen::Index start = 0; start < n; start += seg_len) {
    const Eigen::Index len = std::min(seg_len, n - start);
    for (int talker = 0; talker < kTalkersPerSegment; ++talker) {
      const Formants fm = table[static_cast<std::size_t>(rng.below(table.size()))];
      const double f1 = fm.f1 * rng.uniform(1.0 - kFormantJitter, 1.0 + kFormantJitter);
      const double f2 = fm.f2 * rng.uniform(1.0 - kFormantJitter, 1.0 + kFormantJitter);
      const double f0 = rng.uniform(90.0, 250.0);
      const double gain = rng.uniform(0.5, 1.0);
      for (int k = 1; k * f0 < kVoiceCeilingHz; ++k) {
        const double f = k * f0;
        const double d1 = (f - f1) / kFormantBandwidthHz;
        const double d2 = (f - f2) / kFormantBandwidthHz;
        const double amp = gain * (1.0 / (1.0 + d1 * d1) + 0.7 / (1.0 + d2 * d2) + 0.01);
        const double phase = rng.uniform(0.0, kTwoPi);
        const double w = kTwoPi * f / spec.audio_rate_hz;
        for (Eigen::Index i = 0; i < len; ++i) {
          out(start + i) += amp * std::sin(w * static_cast<double>(i) + phase);
        }
      }
    }
  }
  // White floor at a tenth of the babble power.
  const double floor_sd = std::sqrt(0.1 * power_of(out));
  for (Eigen::Index i = 0; i < n; ++i) out(i) += floor_sd * rng.normal();
  return out;
}

}  // namespace

std::vector<std::string> default_vocabulary(int n_classes) {
  if (n_classes == 4) return {"yes", "no", "left", "right"};
  if (n_classes == 5) return {"a", "e", "i", "o", "u"};
  std::vector<std::string> v;
  for (int i = 0; i < n_classes; ++i) v.push_back("class" + std::to_string(i));
  return v;
}

std::vector<double> default_class_frequencies(int n_classes) {
  const auto& table = frequency_table();
  if (n_classes > static_cast<int>(table.size())) {
    fail(ErrorKind::InvalidArgument, "at most " + std::to_string(table.size()) +
                                         " classes have default signature frequencies");
  }
  return {table.begin(), table.begin() + n_classes};
}

void validate(const SyntheticSpec& spec) {
  if (spec.n_classes < 2) fail(ErrorKind::InvalidArgument, "synthetic spec: need at least 2 classes");
  if (spec.trials_per_class < 1) fail(ErrorKind::InvalidArgument, "synthetic spec: trials per class must be positive");
  if (spec.eeg_channels < 1) fail(ErrorKind::InvalidArgument, "synthetic spec: need at least one EEG channel");
  if (!(spec.duration_s > 0.0)) fail(ErrorKind::InvalidArgument, "synthetic spec: duration must be positive");
  if (!std::isfinite(spec.eeg_snr_db) || !std::isfinite(spec.speech_snr_db)) {
    fail(ErrorKind::InvalidArgument, "synthetic spec: SNRs must be finite");
  }
  if (!spec.vocabulary.empty() && static_cast<int>(spec.vocabulary.size()) != spec.n_classes) {
    fail(ErrorKind::InvalidArgument, "synthetic spec: vocabulary size differs from class count");
  }
  if (!spec.class_frequencies_hz.empty() &&
      static_cast<int>(spec.class_frequencies_hz.size()) != spec.n_classes) {
    fail(ErrorKind::InvalidArgument, "synthetic spec: one signature frequency per class is required");
  }
  if (spec.class_frequencies_hz.empty()) default_class_frequencies(spec.n_classes);
  const auto labels = channel_labels(spec.eeg_channels);
  for (const auto& ch : spec.signal_channels) {
    if (std::none_of(labels.begin(), labels.end(), [&](const std::string& l) { return iequals(l, ch); })) {
      fail(ErrorKind::UnknownChannel, "unknown signal channel '" + ch + "'");
    }
  }
}

TrialSignals synthesize_trial(const SyntheticSpec& spec, int label_index, int index) {
  const auto labels = channel_labels(spec.eeg_channels);
  const auto freqs = spec.class_frequencies_hz.empty() ? default_class_frequencies(spec.n_classes)
                                                       : spec.class_frequencies_hz;
  const double sig_hz = freqs[static_cast<std::size_t>(label_index)];
  const auto idx = static_cast<std::uint64_t>(index);

  TrialSignals t;
  {
    Rng rng(derive_seed(spec.seed, "synth/eeg", idx));
    const auto n = static_cast<Eigen::Index>(std::llround(spec.duration_s * spec.eeg_rate_hz));
    const double noise_sd = std::sqrt(0.5 / std::pow(10.0, spec.eeg_snr_db / 10.0));
    t.eeg.sample_rate_hz = spec.eeg_rate_hz;
    t.eeg.data.resize(n, spec.eeg_channels);
    for (int c = 0; c < spec.eeg_channels; ++c) {
      const bool carries = spec.signal_channels.empty() ||
                           std::any_of(spec.signal_channels.begin(), spec.signal_channels.end(),
                                       [&](const std::string& s) { return iequals(s, labels[static_cast<std::size_t>(c)]); });
      const double phase = rng.uniform(0.0, kTwoPi);
      const double mains_phase = rng.uniform(0.0, kTwoPi);
      const double w = kTwoPi * sig_hz / spec.eeg_rate_hz;
      const double w_mains = kTwoPi * kMainsHz / spec.eeg_rate_hz;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double ti = static_cast<double>(i);
        double v = noise_sd * rng.normal() + kMainsAmplitude * std::sin(w_mains * ti + mains_phase);
        if (carries) v += std::sin(w * ti + phase);
        t.eeg.data(i, c) = v;
      }
    }
  }
  {
    const auto n = static_cast<Eigen::Index>(std::llround(spec.duration_s * spec.audio_rate_hz));
    Rng speech_rng(derive_seed(spec.seed, "synth/speech", idx));
    Rng noise_rng(derive_seed(spec.seed, "synth/speech-noise", idx));
    const Eigen::VectorXd speech = voiced_speech(spec, label_index, speech_rng, n);
    Eigen::VectorXd noise = background_babble(spec, noise_rng, n);
    // SNR is measured against the speech power while the word is active.
    const double speech_power = active_power(speech);
    const double target = speech_power / std::pow(10.0, spec.speech_snr_db / 10.0);
    noise *= std::sqrt(target / power_of(noise));
    t.audio.sample_rate_hz = spec.audio_rate_hz;
    t.audio.data = 0.1 * (speech + noise) / std::sqrt(speech_power);
  }
  return t;
}

std::vector<TrialManifest> generate_synthetic(const SyntheticSpec& spec,
                                              const std::filesystem::path& out_dir) {
  validate(spec);
  const auto vocabulary = spec.vocabulary.empty() ? default_vocabulary(spec.n_classes) : spec.vocabulary;
  const auto labels = channel_labels(spec.eeg_channels);

  DatasetManifest ds;
  ds.tag = spec.tag;
  ds.condition = spec.condition;
  ds.vocabulary = vocabulary;
  const auto fmt = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };
  ds.extra = {{"generator", "synthetic"},
              {"seed", std::to_string(spec.seed)},
              {"trials_per_class", std::to_string(spec.trials_per_class)},
              {"duration_s", fmt(spec.duration_s)},
              {"eeg_snr_db", fmt(spec.eeg_snr_db)},
              {"speech_snr_db", fmt(spec.speech_snr_db)},
              {"signal_channels", spec.signal_channels.empty() ? "all" : join_list(spec.signal_channels)}};

  std::vector<TrialManifest> out;
  int index = 0;
  for (int c = 0; c < spec.n_classes; ++c) {
    for (int k = 0; k < spec.trials_per_class; ++k, ++index) {
      char suffix[16];
      std::snprintf(suffix, sizeof suffix, "_%04d", k);
      TrialManifest m;
      m.id = vocabulary[static_cast<std::size_t>(c)] + suffix;
      m.label = vocabulary[static_cast<std::size_t>(c)];
      m.condition = spec.condition;
      m.eeg_path = "trials/" + m.id + ".eeg.nspf";
      m.audio_path = "trials/" + m.id + ".audio.nspf";
      m.channels = labels;
      m.eeg_rate_hz = spec.eeg_rate_hz;
      m.audio_rate_hz = spec.audio_rate_hz;
      save_trial(out_dir, m, synthesize_trial(spec, c, index));
      ds.trial_ids.push_back(m.id);
      out.push_back(std::move(m));
    }
  }
  ds.to_doc().save(out_dir / kDatasetManifestName);
  return out;
}

}  // namespace nsp::datakit

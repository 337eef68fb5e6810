#pragma once

#include "nsp/datakit/manifest.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace nsp::datakit {

// Stand-in for recorded speech/EEG trials.
//
// EEG: every signal channel carries a unit-amplitude sinusoid at the class
// signature frequency with a per-channel random phase; every channel gets
// white Gaussian noise at `eeg_snr_db` (relative to the sinusoid power) and
// a weak 60 Hz mains component. Channels outside `signal_channels` carry no
// class information.
//
// Audio: a word-like voiced burst (35-60% of the trial, with raised-cosine
// edges, onset drawn from the last 40% of the free span) whose harmonic
// spectrum has two class-specific formant peaks, jittered per trial.
// Background babble is three random vowels from other talkers per 125 ms
// segment over a white-noise floor, scaled to `speech_snr_db` against the
// power of the active speech.
//
// EEG, speech and background noise draw from separate substreams of `seed`,
// so changing the speech SNR leaves the EEG files byte-identical.
struct SyntheticSpec {
  int n_classes = 4;
  int trials_per_class = 50;
  int eeg_channels = 31;
  double duration_s = 1.0;
  double eeg_snr_db = 0.0;
  double speech_snr_db = 20.0;
  Condition condition = Condition::Clean;
  std::vector<double> class_frequencies_hz;   // empty: 6, 11, 17, 23, 29, ... Hz
  std::vector<std::string> signal_channels;   // empty: all channels
  std::vector<std::string> vocabulary;        // empty: chosen from n_classes
  std::string tag = "words";
  std::uint64_t seed = 42;
  double eeg_rate_hz = 1000.0;
  double audio_rate_hz = 16000.0;
};

// Throws InvalidArgument for non-positive counts, unknown signal channels,
// or more classes than signature frequencies.
void validate(const SyntheticSpec& spec);

std::vector<std::string> default_vocabulary(int n_classes);
std::vector<double> default_class_frequencies(int n_classes);

// Trial `index` (0-based over the whole dataset) of class `label_index`.
TrialSignals synthesize_trial(const SyntheticSpec& spec, int label_index, int index);

// Writes dataset.manifest plus trials/<id>.{manifest,eeg.nspf,audio.nspf}.
// Trials are ordered class by class; ids are "<label>_<k>" with k zero-padded.
std::vector<TrialManifest> generate_synthetic(const SyntheticSpec& spec,
                                              const std::filesystem::path& out_dir);

}  // namespace nsp::datakit

#ifndef IED_DATAPIPE_HPP
#define IED_DATAPIPE_HPP

#include <string>
#include <vector>

#include "ied/edf.hpp"
#include "ied/preprocess.hpp"

namespace ied::data {

using prep::Label;

struct ManifestEntry {
  std::string patient_id;
  std::string file_path;
  Label label = Label::non_epileptic;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
};

// Manifest file format: UTF-8 text, header line `patient_id,file_path,label`,
// then one comma-separated record per line.
Manifest parse_manifest(const std::string& text);
Manifest load_manifest(const std::string& path);
std::string format_manifest(const Manifest& manifest);
void save_manifest(const Manifest& manifest, const std::string& path);

enum class SplitSet { train, val, test };

struct SplitAssignment {
  std::vector<SplitSet> assignment;  // parallel to manifest.entries
  std::uint64_t seed = 0;
};

struct SplitFractions {
  double epileptic = 0.2;
  double non_epileptic = 0.2;
  static SplitFractions uniform(double f) { return {f, f}; }
};

// Samples whole patients per class into the test set; every file of a test
// patient goes to test. Deterministic in (manifest, fractions, seed).
SplitAssignment patient_split(const Manifest& manifest,
                              const SplitFractions& test_fractions,
                              std::uint64_t seed);

// File-level split of the non-test entries, stratified by class.
std::pair<std::vector<ManifestEntry>, std::vector<ManifestEntry>>
train_val_split(const std::vector<ManifestEntry>& entries, double val_frac,
                std::uint64_t seed);

// Duplicates every minority-class entry once (so its count doubles), then
// applies one seeded shuffle. Equal class counts are left untouched.
std::vector<ManifestEntry> oversample_minority(
    const std::vector<ManifestEntry>& entries, std::uint64_t seed);

std::vector<ManifestEntry> entries_in(const Manifest& manifest,
                                      const SplitAssignment& split,
                                      SplitSet which);

// --- synthetic data ---------------------------------------------------------

// Background per channel: three sinusoids with frequencies in 2-12 Hz plus
// unit-variance Gaussian noise. Epileptic recordings get spike-and-wave
// transients: a 70 ms triangular spike at spike_amplitude times the channel's
// background std, then a 250 ms half-sine at half that, injected into a
// contiguous block of at least 6 channels.
struct SynthConfig {
  int patients_per_class = 20;
  int recordings_per_patient = 3;
  int channels = 30;
  double duration_s = 30.0;
  int sample_rate_hz = 250;
  int spikes_min = 3;  // events per recording window
  int spikes_max = 6;
  double spike_amplitude = 8.0;  // multiple of background std
  std::uint64_t seed = 0;
};

struct SpikeEvent {
  int start_sample = 0;
  int spike_samples = 0;
  int wave_samples = 0;
  int channel_begin = 0;
  int channel_count = 0;
};

struct SynthRecording {
  std::string file_name;
  edf::EdfFile file;
  std::vector<SpikeEvent> events;           // empty for non-epileptic
  std::vector<double> background_std;       // per channel, before injection
};

struct SynthOutput {
  std::vector<SynthRecording> recordings;
  Manifest manifest;  // file_path holds the bare file name
};

SynthOutput generate_synthetic(const SynthConfig& config);

// Writes the EDF files plus manifest.csv into `dir` (created if needed).
void write_synthetic(const SynthOutput& output, const std::string& dir);

// --- ingestion ---------------------------------------------------------------

// EDF -> RawRecording using manifest metadata for identity and label.
prep::RawRecording to_raw_recording(const edf::EdfFile& file,
                                    const ManifestEntry& entry);

}  // namespace ied::data

#endif  // IED_DATAPIPE_HPP

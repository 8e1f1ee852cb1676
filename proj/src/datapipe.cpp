#include "ied/datapipe.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

namespace ied::data {

namespace {

constexpr double kPi = 3.14159265358979323846;

// deterministic Fisher-Yates
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j =
        static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(v[i - 1], v[j]);
  }
}

long round_half_up(double x) { return static_cast<long>(std::floor(x + 0.5)); }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

Manifest parse_manifest(const std::string& text) {
  Manifest manifest;
  std::istringstream in(text);
  std::string line;
  bool saw_header = false;
  std::set<std::string> paths;
  std::map<std::string, Label> patient_label;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != "patient_id,file_path,label")
        throw Error(ErrorCode::ParseError,
                    "manifest must start with header 'patient_id,file_path,label'");
      saw_header = true;
      continue;
    }
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 3)
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": expected 3 fields, got " +
                      std::to_string(fields.size()));
    ManifestEntry entry;
    entry.patient_id = fields[0];
    entry.file_path = fields[1];
    entry.label = prep::label_from_string(fields[2]);
    if (entry.patient_id.empty() || entry.file_path.empty())
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": empty field");

    if (!paths.insert(entry.file_path).second)
      throw Error(ErrorCode::DuplicatePath,
                  "file listed twice: " + entry.file_path);
    auto [it, inserted] = patient_label.emplace(entry.patient_id, entry.label);
    if (!inserted && it->second != entry.label)
      throw Error(ErrorCode::InconsistentLabel,
                  "patient " + entry.patient_id + " listed with both labels");
    manifest.entries.push_back(std::move(entry));
  }
  if (!saw_header)
    throw Error(ErrorCode::ParseError, "manifest is empty (no header)");
  return manifest;
}

Manifest load_manifest(const std::string& path) {
  return parse_manifest(read_text_file(path));
}

std::string format_manifest(const Manifest& manifest) {
  std::string out = "patient_id,file_path,label\n";
  for (const ManifestEntry& e : manifest.entries) {
    out += e.patient_id;
    out += ',';
    out += e.file_path;
    out += ',';
    out += prep::label_to_string(e.label);
    out += '\n';
  }
  return out;
}

void save_manifest(const Manifest& manifest, const std::string& path) {
  write_text_file(path, format_manifest(manifest));
}

SplitAssignment patient_split(const Manifest& manifest,
                              const SplitFractions& test_fractions,
                              std::uint64_t seed) {
  // unique patients per class, in first-appearance order
  std::vector<std::string> patients[2];
  std::set<std::string> seen;
  for (const ManifestEntry& e : manifest.entries)
    if (seen.insert(e.patient_id).second)
      patients[static_cast<int>(e.label)].push_back(e.patient_id);

  for (int cls = 0; cls < 2; ++cls)
    if (patients[cls].size() < 2)
      throw Error(ErrorCode::TooFewPatients,
                  std::string("need at least 2 patients per class, class '") +
                      prep::label_to_string(static_cast<Label>(cls)) + "' has " +
                      std::to_string(patients[cls].size()));

  std::set<std::string> test_patients;
  for (int cls = 0; cls < 2; ++cls) {
    const double frac = cls == static_cast<int>(Label::epileptic)
                            ? test_fractions.epileptic
                            : test_fractions.non_epileptic;
    Rng rng(hash_combine(seed, static_cast<std::uint64_t>(cls) + 1));
    std::vector<std::string> pool = patients[cls];
    std::sort(pool.begin(), pool.end());  // independent of manifest order
    shuffle(pool, rng);
    long want = round_half_up(frac * static_cast<double>(pool.size()));
    want = std::max(1L, std::min(want, static_cast<long>(pool.size()) - 1));
    for (long i = 0; i < want; ++i) test_patients.insert(pool[static_cast<std::size_t>(i)]);
  }

  SplitAssignment split;
  split.seed = seed;
  split.assignment.reserve(manifest.entries.size());
  for (const ManifestEntry& e : manifest.entries)
    split.assignment.push_back(test_patients.count(e.patient_id)
                                   ? SplitSet::test
                                   : SplitSet::train);
  return split;
}

std::pair<std::vector<ManifestEntry>, std::vector<ManifestEntry>>
train_val_split(const std::vector<ManifestEntry>& entries, double val_frac,
                std::uint64_t seed) {
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < entries.size(); ++i)
    by_class[static_cast<int>(entries[i].label)].push_back(i);
  for (int cls = 0; cls < 2; ++cls)
    if (by_class[cls].size() < 2)
      throw Error(ErrorCode::TooFewFiles,
                  std::string("need at least 2 files per class, class '") +
                      prep::label_to_string(static_cast<Label>(cls)) + "' has " +
                      std::to_string(by_class[cls].size()));

  std::set<std::size_t> val_indices;
  for (int cls = 0; cls < 2; ++cls) {
    Rng rng(hash_combine(seed, 16 + static_cast<std::uint64_t>(cls)));
    std::vector<std::size_t> pool = by_class[cls];
    shuffle(pool, rng);
    const long want = round_half_up(val_frac * static_cast<double>(pool.size()));
    for (long i = 0; i < want; ++i) val_indices.insert(pool[static_cast<std::size_t>(i)]);
  }

  std::pair<std::vector<ManifestEntry>, std::vector<ManifestEntry>> out;
  for (std::size_t i = 0; i < entries.size(); ++i)
    (val_indices.count(i) ? out.second : out.first).push_back(entries[i]);
  return out;
}

std::vector<ManifestEntry> oversample_minority(
    const std::vector<ManifestEntry>& entries, std::uint64_t seed) {
  std::size_t count[2] = {0, 0};
  for (const ManifestEntry& e : entries) ++count[static_cast<int>(e.label)];
  if (count[0] == count[1]) return entries;  // tie: no class is minority
  const Label minority =
      count[0] < count[1] ? Label::non_epileptic : Label::epileptic;
  std::vector<ManifestEntry> out = entries;
  for (const ManifestEntry& e : entries)
    if (e.label == minority) out.push_back(e);
  Rng rng(hash_combine(seed, 0x0eedu));
  shuffle(out, rng);
  return out;
}

std::vector<ManifestEntry> entries_in(const Manifest& manifest,
                                      const SplitAssignment& split,
                                      SplitSet which) {
  std::vector<ManifestEntry> out;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i)
    if (split.assignment[i] == which) out.push_back(manifest.entries[i]);
  return out;
}

// --- synthetic data -----------------------------------------------------------

namespace {

SynthRecording synth_recording(const SynthConfig& cfg, const std::string& patient_id,
                               int recording_index, Label label) {
  Rng rng(hash_combine(hash_combine(cfg.seed, hash_string(patient_id)),
                       static_cast<std::uint64_t>(recording_index)));

  const int fs = cfg.sample_rate_hz;
  const int num_records = static_cast<int>(std::lround(cfg.duration_s));
  const int samples = num_records * fs;
  const int channels = cfg.channels;

  SynthRecording rec;
  rec.background_std.resize(static_cast<std::size_t>(channels));
  std::vector<std::vector<double>> data(static_cast<std::size_t>(channels));

  for (int c = 0; c < channels; ++c) {
    double freq[3], phase[3];
    for (int k = 0; k < 3; ++k) {
      freq[k] = rng.uniform(2.0, 12.0);
      phase[k] = rng.uniform(0.0, 2.0 * kPi);
    }
    std::vector<double>& ch = data[static_cast<std::size_t>(c)];
    ch.resize(static_cast<std::size_t>(samples));
    double sumsq = 0.0, sum = 0.0;
    for (int t = 0; t < samples; ++t) {
      double v = rng.normal();
      for (int k = 0; k < 3; ++k)
        v += std::sin(2.0 * kPi * freq[k] * t / fs + phase[k]);
      ch[static_cast<std::size_t>(t)] = v;
      sum += v;
      sumsq += v * v;
    }
    const double mean = sum / samples;
    rec.background_std[static_cast<std::size_t>(c)] =
        std::sqrt(std::max(0.0, sumsq / samples - mean * mean));
  }

  if (label == Label::epileptic) {
    const int spike_len = std::max(3, static_cast<int>(std::lround(0.070 * fs)));
    const int wave_len = std::max(4, static_cast<int>(std::lround(0.250 * fs)));
    const int event_len = spike_len + wave_len;
    const int n_events =
        static_cast<int>(rng.uniform_int(cfg.spikes_min, cfg.spikes_max));
    for (int e = 0; e < n_events; ++e) {
      SpikeEvent ev;
      ev.spike_samples = spike_len;
      ev.wave_samples = wave_len;
      ev.start_sample =
          static_cast<int>(rng.uniform_int(0, samples - event_len));
      const int min_block = std::min(6, channels);
      ev.channel_count =
          static_cast<int>(rng.uniform_int(min_block, channels));
      ev.channel_begin =
          static_cast<int>(rng.uniform_int(0, channels - ev.channel_count));

      for (int c = ev.channel_begin; c < ev.channel_begin + ev.channel_count; ++c) {
        std::vector<double>& ch = data[static_cast<std::size_t>(c)];
        const double peak =
            cfg.spike_amplitude * rec.background_std[static_cast<std::size_t>(c)];
        // triangular spike, apex mid-way
        for (int t = 0; t < spike_len; ++t) {
          const double frac = static_cast<double>(t) / (spike_len - 1);
          ch[static_cast<std::size_t>(ev.start_sample + t)] +=
              peak * (1.0 - std::abs(2.0 * frac - 1.0));
        }
        // half-sine slow wave at half the spike amplitude
        for (int t = 0; t < wave_len; ++t) {
          ch[static_cast<std::size_t>(ev.start_sample + spike_len + t)] +=
              0.5 * peak * std::sin(kPi * t / (wave_len - 1));
        }
      }
      rec.events.push_back(ev);
    }
  }

  // EDF container; physical range padded to cover the realized samples
  rec.file.header.patient_id = patient_id;
  rec.file.header.recording_id = "synthetic";
  rec.file.header.num_records = num_records;
  rec.file.header.record_duration_s = 1.0;
  rec.file.header.num_signals = channels;
  rec.file.signals.resize(static_cast<std::size_t>(channels));
  rec.file.samples = std::move(data);
  for (int c = 0; c < channels; ++c) {
    edf::SignalSpec& spec = rec.file.signals[static_cast<std::size_t>(c)];
    spec.label = "EEG SYN" + std::to_string(c);
    spec.physical_dim = "uV";
    double max_abs = 1.0;
    for (double v : rec.file.samples[static_cast<std::size_t>(c)])
      max_abs = std::max(max_abs, std::abs(v));
    const double bound = std::ceil(max_abs) + 1.0;
    spec.physical_min = -bound;
    spec.physical_max = bound;
    spec.digital_min = -32768;
    spec.digital_max = 32767;
    spec.samples_per_record = fs;
  }
  return rec;
}

}  // namespace

SynthOutput generate_synthetic(const SynthConfig& cfg) {
  if (cfg.patients_per_class < 1 || cfg.recordings_per_patient < 1 ||
      cfg.channels < 1 || cfg.sample_rate_hz <= 0 || cfg.duration_s <= 0.0 ||
      cfg.spikes_min < 1 || cfg.spikes_max < cfg.spikes_min ||
      cfg.spike_amplitude <= 0.0)
    throw Error(ErrorCode::ConfigInvalid, "synthetic config out of range");
  const int fs = cfg.sample_rate_hz;
  const int event_len = std::max(3, static_cast<int>(std::lround(0.070 * fs))) +
                        std::max(4, static_cast<int>(std::lround(0.250 * fs)));
  if (static_cast<int>(std::lround(cfg.duration_s)) * fs < event_len)
    throw Error(ErrorCode::ConfigInvalid,
                "window too short for one spike-and-wave event");

  SynthOutput out;
  for (int cls = 0; cls < 2; ++cls) {
    const Label label = static_cast<Label>(cls);
    const char* prefix = label == Label::epileptic ? "EP" : "NE";
    for (int p = 0; p < cfg.patients_per_class; ++p) {
      char pid[16];
      std::snprintf(pid, sizeof pid, "%s%03d", prefix, p);
      for (int r = 0; r < cfg.recordings_per_patient; ++r) {
        SynthRecording rec = synth_recording(cfg, pid, r, label);
        char name[48];
        std::snprintf(name, sizeof name, "%s%03d_r%02d.edf", prefix, p, r);
        rec.file_name = name;
        out.manifest.entries.push_back({pid, name, label});
        out.recordings.push_back(std::move(rec));
      }
    }
  }
  return out;
}

void write_synthetic(const SynthOutput& output, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const SynthRecording& rec : output.recordings)
    edf::write_edf_file((std::filesystem::path(dir) / rec.file_name).string(),
                        rec.file);
  save_manifest(output.manifest,
                (std::filesystem::path(dir) / "manifest.csv").string());
}

prep::RawRecording to_raw_recording(const edf::EdfFile& file,
                                    const ManifestEntry& entry) {
  if (file.signals.empty())
    throw Error(ErrorCode::EmptyRecording, entry.file_path + " has no signals");
  const int spr = file.signals[0].samples_per_record;
  for (const edf::SignalSpec& s : file.signals)
    if (s.samples_per_record != spr)
      throw Error(ErrorCode::SampleRateMismatch,
                  entry.file_path + " mixes per-signal sample rates");
  prep::RawRecording raw;
  raw.patient_id = entry.patient_id;
  raw.label = entry.label;
  raw.sample_rate = spr / file.header.record_duration_s;
  raw.channels = file.samples;
  return raw;
}

}  // namespace ied::data

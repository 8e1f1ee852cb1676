#ifndef IED_COMMON_HPP
#define IED_COMMON_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ied {

enum class ErrorCode {
  // edf
  TruncatedFile,
  MalformedField,
  BadScaling,
  RangeOverflow,
  // preprocess
  EmptyRecording,
  InvalidBand,
  SampleRateMismatch,
  // nn / models
  ShapeMismatch,
  NotTrained,
  // datapipe
  DuplicatePath,
  InconsistentLabel,
  ParseError,
  TooFewPatients,
  TooFewFiles,
  ConfigInvalid,
  // trainer
  NonFiniteLoss,
  EmptyDataset,
  CorruptCheckpoint,
  VersionMismatch,
  // metrics
  LengthMismatch,
  DegenerateDenominator,
  SingleClass,
  // cli / io
  IoError,
  UsageError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Mixes bits of a 64-bit value (splitmix64 finalizer). Used both for
// hash-combining derived seeds and as a cheap avalanche step.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
  return mix64(seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

std::uint64_t hash_string(const std::string& s);

// Deterministic random stream. mt19937_64 is fully specified by the standard
// and the derived draws below avoid std::*_distribution, whose output is
// implementation-defined; the same seed gives the same stream on every
// platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive integer range
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(engine_() % span);
  }

  // standard normal via Box-Muller, second value cached
  double normal();

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// --- little-endian byte helpers ----------------------------------------

using Bytes = std::vector<std::uint8_t>;

void put_u16le(Bytes& out, std::uint16_t v);
void put_u32le(Bytes& out, std::uint32_t v);
void put_u64le(Bytes& out, std::uint64_t v);
void put_f32le(Bytes& out, float v);
void put_f64le(Bytes& out, double v);

// Bounds-checked reader over a byte buffer.
class ByteReader {
 public:
  ByteReader(const std::uint8_t* data, std::size_t size, ErrorCode on_underrun)
      : data_(data), size_(size), on_underrun_(on_underrun) {}
  explicit ByteReader(const Bytes& buf,
                      ErrorCode on_underrun = ErrorCode::TruncatedFile)
      : ByteReader(buf.data(), buf.size(), on_underrun) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return size_ - pos_; }

  std::uint8_t u8();
  std::uint16_t u16le();
  std::uint32_t u32le();
  std::uint64_t u64le();
  float f32le();
  double f64le();
  std::int16_t i16le() { return static_cast<std::int16_t>(u16le()); }
  std::string text(std::size_t n);

 private:
  void need(std::size_t n) const;
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
  ErrorCode on_underrun_;
};

Bytes read_file(const std::string& path);
void write_file(const std::string& path, const Bytes& data);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Runs fn(0..n-1) across up to `threads` workers (strided assignment).
// Results written to index-addressed slots are independent of the worker
// count; the first exception, if any, is rethrown on the caller.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace ied

#endif  // IED_COMMON_HPP

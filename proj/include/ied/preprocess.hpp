#ifndef IED_PREPROCESS_HPP
#define IED_PREPROCESS_HPP

#include <complex>
#include <string>
#include <vector>

#include "ied/common.hpp"

namespace ied::prep {

enum class Label { non_epileptic = 0, epileptic = 1 };

Label label_from_string(const std::string& s);
const char* label_to_string(Label label);

// channel-major signal matrix: channels[c][t]
using Channels = std::vector<std::vector<double>>;

struct RawRecording {
  std::string patient_id;
  Label label = Label::non_epileptic;
  double sample_rate = 250.0;
  Channels channels;
};

struct PreparedRecording {
  std::string patient_id;
  Label label = Label::non_epileptic;
  Channels window;  // target_channels x target_len, standardized
};

// Digital IIR transfer function from the band-pass design, plus the
// pole-zero form it was derived from so responses can be evaluated two
// independent ways.
struct FilterCoefficients {
  std::vector<double> b;  // numerator, b[0] applies to x[n]
  std::vector<double> a;  // denominator, a[0] == 1
  std::vector<std::complex<double>> zeros;
  std::vector<std::complex<double>> poles;
  double gain = 1.0;
  double fs = 250.0;
  double low_hz = 0.5;
  double high_hz = 49.0;
  int order = 2;  // analog prototype order; the digital filter has 2*order poles
};

struct PreprocessConfig {
  int target_channels = 30;
  int target_len = 7500;      // 30 s at 250 Hz
  double sample_rate = 250.0;
  double band_low_hz = 0.5;
  double band_high_hz = 49.0;
  int filter_order = 2;
  bool zero_phase = false;    // forward-backward filtering, off by default
  bool allow_resample = false;
};

// --- pipeline stages -----------------------------------------------------

// Keeps the first `target` channels, or recycles rows 0..n-1 to pad up to
// `target` when fewer are present.
Channels normalize_channels(const Channels& channels, int target = 30);

// Truncates or zero-pads every channel to exactly `target_len` samples.
Channels fit_window(const Channels& channels, int target_len = 7500);

FilterCoefficients design_bandpass(double fs, double low_hz, double high_hz,
                                   int order);

// Causal direct-form filtering with zero initial state.
std::vector<double> apply_filter(const FilterCoefficients& coeffs,
                                 const std::vector<double>& signal);

// apply_filter forward then backward; zero phase, squared magnitude.
std::vector<double> apply_filter_zero_phase(const FilterCoefficients& coeffs,
                                            const std::vector<double>& signal);

// Per-channel (x - mean) / std with population std; channels with
// std < 1e-12 become all-zero.
Channels standardize(const Channels& window);

PreparedRecording preprocess_recording(const RawRecording& raw,
                                       const PreprocessConfig& config = {});

// --- response evaluation -------------------------------------------------

// |H| at `hz` via the polynomial coefficients (Horner on the unit circle).
double magnitude_response(const FilterCoefficients& coeffs, double hz);

// |H| at `hz` via the pole-zero product; independent of the b/a route.
double magnitude_response_zpk(const FilterCoefficients& coeffs, double hz);

// --- resampling ----------------------------------------------------------

// Polyphase rational-rate conversion by `up`/`down` with a Kaiser-windowed
// sinc low-pass. Output length is ceil(len * up / down).
std::vector<double> resample_poly(const std::vector<double>& x, int up, int down);

// Rational approximation of to_hz/from_hz used by the resampling path.
std::pair<int, int> rational_rate_ratio(double from_hz, double to_hz);

}  // namespace ied::prep

#endif  // IED_PREPROCESS_HPP

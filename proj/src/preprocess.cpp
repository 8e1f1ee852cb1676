#include "ied/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ied::prep {

namespace {

constexpr double kPi = 3.14159265358979323846;

using Complex = std::complex<double>;

// expand a monic polynomial from its roots; conjugate-paired roots give
// (numerically) real coefficients
std::vector<double> poly_from_roots(const std::vector<Complex>& roots) {
  std::vector<Complex> coeffs{1.0};
  for (const Complex& r : roots) {
    std::vector<Complex> next(coeffs.size() + 1, Complex(0.0));
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      next[i] += coeffs[i];
      next[i + 1] -= coeffs[i] * r;
    }
    coeffs = std::move(next);
  }
  std::vector<double> out(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) out[i] = coeffs[i].real();
  return out;
}

}  // namespace

Label label_from_string(const std::string& s) {
  if (s == "epileptic") return Label::epileptic;
  if (s == "non_epileptic") return Label::non_epileptic;
  throw Error(ErrorCode::ParseError, "unknown label '" + s + "'");
}

const char* label_to_string(Label label) {
  return label == Label::epileptic ? "epileptic" : "non_epileptic";
}

Channels normalize_channels(const Channels& channels, int target) {
  if (channels.empty() || channels[0].empty())
    throw Error(ErrorCode::EmptyRecording, "no channels or no samples");
  const int c = static_cast<int>(channels.size());
  if (c >= target) return Channels(channels.begin(), channels.begin() + target);
  Channels out;
  out.reserve(static_cast<std::size_t>(target));
  // rows beyond the input recycle the first channels, in order
  for (int i = 0; i < target; ++i)
    out.push_back(channels[static_cast<std::size_t>(i % c)]);
  return out;
}

Channels fit_window(const Channels& channels, int target_len) {
  if (channels.empty() || channels[0].empty())
    throw Error(ErrorCode::EmptyRecording, "no channels or no samples");
  Channels out(channels.size());
  for (std::size_t c = 0; c < channels.size(); ++c) {
    out[c].assign(static_cast<std::size_t>(target_len), 0.0);
    const std::size_t n =
        std::min(channels[c].size(), static_cast<std::size_t>(target_len));
    std::copy(channels[c].begin(), channels[c].begin() + n, out[c].begin());
  }
  return out;
}

FilterCoefficients design_bandpass(double fs, double low_hz, double high_hz,
                                   int order) {
  if (!(low_hz > 0.0) || !(low_hz < high_hz) || !(high_hz < fs / 2.0))
    throw Error(ErrorCode::InvalidBand,
                "need 0 < low < high < fs/2, got low=" + std::to_string(low_hz) +
                    " high=" + std::to_string(high_hz) + " fs=" + std::to_string(fs));
  if (order < 1)
    throw Error(ErrorCode::InvalidBand, "order must be >= 1");

  // analog Butterworth prototype: poles on the unit circle, left half-plane
  std::vector<Complex> proto_poles;
  for (int k = 0; k < order; ++k) {
    const double theta = kPi * (2.0 * k + order + 1.0) / (2.0 * order);
    proto_poles.emplace_back(std::cos(theta), std::sin(theta));
  }

  // pre-warp band edges for the bilinear transform
  const double fs2 = 2.0 * fs;
  const double w_low = fs2 * std::tan(kPi * low_hz / fs);
  const double w_high = fs2 * std::tan(kPi * high_hz / fs);
  const double bw = w_high - w_low;
  const double w0 = std::sqrt(w_low * w_high);

  // low-pass -> band-pass: every prototype pole splits into two, the
  // prototype's `order` zeros at infinity land at s = 0
  std::vector<Complex> analog_poles;
  for (const Complex& p : proto_poles) {
    const Complex scaled = p * (bw / 2.0);
    const Complex delta = std::sqrt(scaled * scaled - w0 * w0);
    analog_poles.push_back(scaled + delta);
    analog_poles.push_back(scaled - delta);
  }
  std::vector<Complex> analog_zeros(static_cast<std::size_t>(order), Complex(0.0));
  double analog_gain = std::pow(bw, order);

  // bilinear transform of the zpk form
  FilterCoefficients coeffs;
  Complex gain_num(1.0), gain_den(1.0);
  for (const Complex& z : analog_zeros) {
    coeffs.zeros.push_back((fs2 + z) / (fs2 - z));
    gain_num *= (fs2 - z);
  }
  for (const Complex& p : analog_poles) {
    coeffs.poles.push_back((fs2 + p) / (fs2 - p));
    gain_den *= (fs2 - p);
  }
  // zeros at analog infinity map to z = -1
  for (int k = 0; k < order; ++k) coeffs.zeros.emplace_back(-1.0, 0.0);
  coeffs.gain = analog_gain * (gain_num / gain_den).real();

  coeffs.b = poly_from_roots(coeffs.zeros);
  for (double& v : coeffs.b) v *= coeffs.gain;
  coeffs.a = poly_from_roots(coeffs.poles);
  coeffs.fs = fs;
  coeffs.low_hz = low_hz;
  coeffs.high_hz = high_hz;
  coeffs.order = order;

  for (const Complex& p : coeffs.poles)
    if (std::abs(p) >= 1.0)
      throw Error(ErrorCode::InvalidBand,
                  "designed filter is unstable (pole radius " +
                      std::to_string(std::abs(p)) + ")");
  return coeffs;
}

std::vector<double> apply_filter(const FilterCoefficients& coeffs,
                                 const std::vector<double>& signal) {
  const std::vector<double>& b = coeffs.b;
  const std::vector<double>& a = coeffs.a;
  const std::size_t n = std::max(b.size(), a.size());
  // direct form II transposed, zero initial state
  std::vector<double> state(n > 0 ? n - 1 : 0, 0.0);
  std::vector<double> out(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const double x = signal[i];
    const double y = b[0] * x + (state.empty() ? 0.0 : state[0]);
    for (std::size_t k = 0; k + 1 < state.size(); ++k) {
      const double bk = k + 1 < b.size() ? b[k + 1] : 0.0;
      const double ak = k + 1 < a.size() ? a[k + 1] : 0.0;
      state[k] = bk * x - ak * y + state[k + 1];
    }
    if (!state.empty()) {
      const std::size_t k = state.size() - 1;
      const double bk = k + 1 < b.size() ? b[k + 1] : 0.0;
      const double ak = k + 1 < a.size() ? a[k + 1] : 0.0;
      state[k] = bk * x - ak * y;
    }
    out[i] = y;
  }
  return out;
}

std::vector<double> apply_filter_zero_phase(const FilterCoefficients& coeffs,
                                            const std::vector<double>& signal) {
  std::vector<double> fwd = apply_filter(coeffs, signal);
  std::reverse(fwd.begin(), fwd.end());
  std::vector<double> bwd = apply_filter(coeffs, fwd);
  std::reverse(bwd.begin(), bwd.end());
  return bwd;
}

Channels standardize(const Channels& window) {
  Channels out(window.size());
  for (std::size_t c = 0; c < window.size(); ++c) {
    const std::vector<double>& x = window[c];
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= n;  // population variance
    const double sd = std::sqrt(var);
    out[c].resize(x.size());
    if (sd < 1e-12) {
      std::fill(out[c].begin(), out[c].end(), 0.0);
    } else {
      for (std::size_t i = 0; i < x.size(); ++i) out[c][i] = (x[i] - mean) / sd;
    }
  }
  return out;
}

PreparedRecording preprocess_recording(const RawRecording& raw,
                                       const PreprocessConfig& config) {
  if (raw.channels.empty() || raw.channels[0].empty())
    throw Error(ErrorCode::EmptyRecording, "recording has no data");

  Channels channels = raw.channels;
  if (raw.sample_rate != config.sample_rate) {
    if (!config.allow_resample)
      throw Error(ErrorCode::SampleRateMismatch,
                  "recording sampled at " + std::to_string(raw.sample_rate) +
                      " Hz, pipeline expects " + std::to_string(config.sample_rate));
    const auto [up, down] = rational_rate_ratio(raw.sample_rate, config.sample_rate);
    for (std::vector<double>& ch : channels) ch = resample_poly(ch, up, down);
  }

  channels = normalize_channels(channels, config.target_channels);
  channels = fit_window(channels, config.target_len);

  const FilterCoefficients coeffs = design_bandpass(
      config.sample_rate, config.band_low_hz, config.band_high_hz, config.filter_order);
  for (std::vector<double>& ch : channels)
    ch = config.zero_phase ? apply_filter_zero_phase(coeffs, ch)
                           : apply_filter(coeffs, ch);

  PreparedRecording prepared;
  prepared.patient_id = raw.patient_id;
  prepared.label = raw.label;
  prepared.window = standardize(channels);
  return prepared;
}

double magnitude_response(const FilterCoefficients& coeffs, double hz) {
  const double w = 2.0 * kPi * hz / coeffs.fs;
  const Complex zinv = std::exp(Complex(0.0, -w));
  // Horner in z^-1
  Complex num(0.0), den(0.0);
  for (auto it = coeffs.b.rbegin(); it != coeffs.b.rend(); ++it) num = num * zinv + *it;
  for (auto it = coeffs.a.rbegin(); it != coeffs.a.rend(); ++it) den = den * zinv + *it;
  return std::abs(num / den);
}

double magnitude_response_zpk(const FilterCoefficients& coeffs, double hz) {
  const double w = 2.0 * kPi * hz / coeffs.fs;
  const Complex z = std::exp(Complex(0.0, w));
  Complex num(coeffs.gain), den(1.0);
  for (const Complex& zero : coeffs.zeros) num *= (z - zero);
  for (const Complex& pole : coeffs.poles) den *= (z - pole);
  return std::abs(num) / std::abs(den);
}

std::pair<int, int> rational_rate_ratio(double from_hz, double to_hz) {
  if (from_hz <= 0.0 || to_hz <= 0.0)
    throw Error(ErrorCode::SampleRateMismatch, "rates must be positive");
  // continued-fraction approximation of to/from with bounded terms
  const double target = to_hz / from_hz;
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double x = target;
  for (int i = 0; i < 64; ++i) {
    const double a = std::floor(x);
    const long p2 = static_cast<long>(a) * p1 + p0;
    const long q2 = static_cast<long>(a) * q1 + q0;
    if (p2 > 100000 || q2 > 100000) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    const double frac = x - a;
    if (frac < 1e-12 || std::abs(static_cast<double>(p1) / q1 - target) < 1e-12) break;
    x = 1.0 / frac;
  }
  if (q1 <= 0 || p1 <= 0)
    throw Error(ErrorCode::SampleRateMismatch,
                "cannot express rate ratio " + std::to_string(target) + " rationally");
  return {static_cast<int>(p1), static_cast<int>(q1)};
}

std::vector<double> resample_poly(const std::vector<double>& x, int up, int down) {
  if (up < 1 || down < 1)
    throw Error(ErrorCode::SampleRateMismatch, "up/down factors must be >= 1");
  if (up == down) return x;

  // Kaiser-windowed sinc low-pass at the tighter of the two Nyquist rates
  const int m = std::max(up, down);
  const int half_zero_crossings = 10;
  const int half = half_zero_crossings * m;
  const int taps = 2 * half + 1;
  const double beta = 8.555;  // ~80 dB stopband
  const double cutoff = 1.0 / m;  // relative to the upsampled Nyquist

  auto bessel_i0 = [](double v) {
    double sum = 1.0, term = 1.0;
    for (int k = 1; k < 64; ++k) {
      term *= (v / (2.0 * k)) * (v / (2.0 * k));
      sum += term;
      if (term < 1e-18 * sum) break;
    }
    return sum;
  };

  std::vector<double> h(static_cast<std::size_t>(taps));
  const double i0beta = bessel_i0(beta);
  for (int i = 0; i < taps; ++i) {
    const double t = i - half;
    const double sinc = t == 0.0 ? cutoff
                                 : std::sin(kPi * cutoff * t) / (kPi * t);
    const double r = t / half;
    const double window = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0beta;
    h[static_cast<std::size_t>(i)] = sinc * window * up;
  }

  const std::size_t out_len =
      (x.size() * static_cast<std::size_t>(up) + down - 1) / down;
  std::vector<double> y(out_len, 0.0);
  // y[n] = sum_k h[n*down + half - k*up] * x[k], iterating only valid taps
  for (std::size_t n = 0; n < out_len; ++n) {
    const long center = static_cast<long>(n) * down + half;
    long k_lo = (center - (taps - 1) + up - 1) / up;
    long k_hi = center / up;
    k_lo = std::max<long>(k_lo, 0);
    k_hi = std::min<long>(k_hi, static_cast<long>(x.size()) - 1);
    double acc = 0.0;
    for (long k = k_lo; k <= k_hi; ++k)
      acc += h[static_cast<std::size_t>(center - k * up)] * x[static_cast<std::size_t>(k)];
    y[n] = acc;
  }
  return y;
}

}  // namespace ied::prep

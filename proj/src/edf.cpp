#include "ied/edf.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace ied::edf {

namespace {

constexpr std::size_t kFixedHeaderBytes = 256;
constexpr std::size_t kPerSignalHeaderBytes = 256;

bool printable_ascii(const std::string& s) {
  for (unsigned char c : s)
    if (c < 32 || c > 126) return false;
  return true;
}

std::string trim_spaces(const std::string& s) {
  std::size_t b = s.find_first_not_of(' ');
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(' ');
  return s.substr(b, e - b + 1);
}

long parse_long_field(const std::string& raw, const char* what) {
  const std::string t = trim_spaces(raw);
  if (t.empty())
    throw Error(ErrorCode::MalformedField, std::string(what) + " is blank");
  char* end = nullptr;
  const long v = std::strtol(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size())
    throw Error(ErrorCode::MalformedField,
                std::string(what) + " is not an integer: '" + t + "'");
  return v;
}

double parse_double_field(const std::string& raw, const char* what) {
  const std::string t = trim_spaces(raw);
  if (t.empty())
    throw Error(ErrorCode::MalformedField, std::string(what) + " is blank");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size())
    throw Error(ErrorCode::MalformedField,
                std::string(what) + " is not numeric: '" + t + "'");
  return v;
}

// Fixed-width space-padded ASCII field; values that do not fit are an error
// rather than silently clipped.
void put_field(Bytes& out, const std::string& value, std::size_t width,
               const char* what) {
  if (value.size() > width)
    throw Error(ErrorCode::MalformedField,
                std::string(what) + " exceeds " + std::to_string(width) +
                    " chars: '" + value + "'");
  if (!printable_ascii(value))
    throw Error(ErrorCode::MalformedField,
                std::string(what) + " has non-printable characters");
  for (char c : value) out.push_back(static_cast<std::uint8_t>(c));
  for (std::size_t i = value.size(); i < width; ++i) out.push_back(' ');
}

std::string format_number(double v, std::size_t width) {
  char buf[64];
  // shortest representation that still fits the 8-char field
  for (int prec = 10; prec >= 0; --prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::string(buf).size() <= width) return buf;
  }
  throw Error(ErrorCode::MalformedField,
              "numeric value does not fit in field: " + std::to_string(v));
}

void put_number(Bytes& out, double v, std::size_t width, const char* what) {
  put_field(out, format_number(v, width), width, what);
}

void put_number(Bytes& out, long v, std::size_t width, const char* what) {
  put_field(out, std::to_string(v), width, what);
}

}  // namespace

double quantization_step(const SignalSpec& spec) {
  return (spec.physical_max - spec.physical_min) /
         (spec.digital_max - spec.digital_min);
}

double physical_value(int digital, const SignalSpec& spec) {
  if (spec.digital_max == spec.digital_min)
    throw Error(ErrorCode::BadScaling, "digital_max equals digital_min");
  return spec.physical_min +
         (static_cast<double>(digital) - spec.digital_min) *
             (spec.physical_max - spec.physical_min) /
             (static_cast<double>(spec.digital_max) - spec.digital_min);
}

int digital_value(double physical, const SignalSpec& spec) {
  if (spec.physical_max == spec.physical_min)
    throw Error(ErrorCode::BadScaling, "physical_max equals physical_min");
  if (physical < spec.physical_min || physical > spec.physical_max)
    throw Error(ErrorCode::RangeOverflow,
                "sample " + std::to_string(physical) + " outside [" +
                    std::to_string(spec.physical_min) + ", " +
                    std::to_string(spec.physical_max) + "]");
  const double scaled =
      (physical - spec.physical_min) *
          (static_cast<double>(spec.digital_max) - spec.digital_min) /
          (spec.physical_max - spec.physical_min) +
      spec.digital_min;
  // round half away from zero so golden files are stable
  const double rounded = scaled >= 0.0 ? std::floor(scaled + 0.5)
                                       : std::ceil(scaled - 0.5);
  long d = static_cast<long>(rounded);
  if (d < spec.digital_min) d = spec.digital_min;
  if (d > spec.digital_max) d = spec.digital_max;
  return static_cast<int>(d);
}

EdfFile parse_edf(const Bytes& bytes) {
  if (bytes.size() < kFixedHeaderBytes)
    throw Error(ErrorCode::TruncatedFile,
                "file shorter than the 256-byte fixed header");
  ByteReader r(bytes);

  EdfFile file;
  EdfHeader& h = file.header;

  const std::string version_raw = r.text(8);
  const std::string patient_raw = r.text(80);
  const std::string recording_raw = r.text(80);
  const std::string date_raw = r.text(8);
  const std::string time_raw = r.text(8);
  const std::string header_bytes_raw = r.text(8);
  const std::string reserved_raw = r.text(44);
  const std::string num_records_raw = r.text(8);
  const std::string duration_raw = r.text(8);
  const std::string num_signals_raw = r.text(4);

  for (const std::string* f : {&version_raw, &patient_raw, &recording_raw,
                               &date_raw, &time_raw, &reserved_raw})
    if (!printable_ascii(*f))
      throw Error(ErrorCode::MalformedField,
                  "header text field has non-printable characters");

  h.version = trim_spaces(version_raw);
  h.patient_id = trim_spaces(patient_raw);
  h.recording_id = trim_spaces(recording_raw);
  h.start_date = trim_spaces(date_raw);
  h.start_time = trim_spaces(time_raw);
  h.reserved = trim_spaces(reserved_raw);
  h.header_bytes = static_cast<int>(parse_long_field(header_bytes_raw, "header_bytes"));
  h.num_records = parse_long_field(num_records_raw, "num_records");
  h.record_duration_s = parse_double_field(duration_raw, "record_duration");
  h.num_signals = static_cast<int>(parse_long_field(num_signals_raw, "num_signals"));

  if (h.num_signals < 0)
    throw Error(ErrorCode::MalformedField, "negative num_signals");
  if (h.num_records < 0)
    throw Error(ErrorCode::MalformedField, "negative num_records");
  if (h.record_duration_s <= 0.0)
    throw Error(ErrorCode::MalformedField, "record duration must be positive");
  const long expected_header =
      static_cast<long>(kFixedHeaderBytes) +
      static_cast<long>(kPerSignalHeaderBytes) * h.num_signals;
  if (h.header_bytes != expected_header)
    throw Error(ErrorCode::TruncatedFile,
                "header_bytes field " + std::to_string(h.header_bytes) +
                    " does not match 256 + 256*num_signals = " +
                    std::to_string(expected_header));
  if (bytes.size() < static_cast<std::size_t>(expected_header))
    throw Error(ErrorCode::TruncatedFile, "file shorter than declared header");

  const int ns = h.num_signals;
  file.signals.resize(ns);

  // signal header fields are grouped: all labels, then all transducers, ...
  std::vector<std::string> raw(ns);
  auto read_group = [&](std::size_t width) {
    for (int s = 0; s < ns; ++s) raw[s] = r.text(width);
  };

  read_group(16);
  for (int s = 0; s < ns; ++s) file.signals[s].label = trim_spaces(raw[s]);
  read_group(80);
  for (int s = 0; s < ns; ++s) file.signals[s].transducer = trim_spaces(raw[s]);
  read_group(8);
  for (int s = 0; s < ns; ++s) file.signals[s].physical_dim = trim_spaces(raw[s]);
  read_group(8);
  for (int s = 0; s < ns; ++s)
    file.signals[s].physical_min = parse_double_field(raw[s], "physical_min");
  read_group(8);
  for (int s = 0; s < ns; ++s)
    file.signals[s].physical_max = parse_double_field(raw[s], "physical_max");
  read_group(8);
  for (int s = 0; s < ns; ++s)
    file.signals[s].digital_min = static_cast<int>(parse_long_field(raw[s], "digital_min"));
  read_group(8);
  for (int s = 0; s < ns; ++s)
    file.signals[s].digital_max = static_cast<int>(parse_long_field(raw[s], "digital_max"));
  read_group(80);
  for (int s = 0; s < ns; ++s) file.signals[s].prefiltering = trim_spaces(raw[s]);
  read_group(8);
  for (int s = 0; s < ns; ++s)
    file.signals[s].samples_per_record =
        static_cast<int>(parse_long_field(raw[s], "samples_per_record"));
  read_group(32);
  for (int s = 0; s < ns; ++s) file.signals[s].reserved = trim_spaces(raw[s]);

  std::size_t record_samples = 0;
  for (const SignalSpec& spec : file.signals) {
    if (spec.physical_max == spec.physical_min)
      throw Error(ErrorCode::BadScaling,
                  "physical_max equals physical_min for '" + spec.label + "'");
    if (spec.digital_max <= spec.digital_min)
      throw Error(ErrorCode::MalformedField,
                  "digital range empty for '" + spec.label + "'");
    if (spec.digital_min < -32768 || spec.digital_max > 32767)
      throw Error(ErrorCode::MalformedField,
                  "digital range outside 16-bit for '" + spec.label + "'");
    if (spec.samples_per_record <= 0)
      throw Error(ErrorCode::MalformedField,
                  "samples_per_record must be positive for '" + spec.label + "'");
    record_samples += static_cast<std::size_t>(spec.samples_per_record);
  }

  const std::size_t body = bytes.size() - static_cast<std::size_t>(expected_header);
  const std::size_t expected_body =
      static_cast<std::size_t>(h.num_records) * record_samples * 2;
  if (body < expected_body)
    throw Error(ErrorCode::TruncatedFile,
                "data section holds " + std::to_string(body) + " bytes, header declares " +
                    std::to_string(expected_body));
  if (body > expected_body)
    throw Error(ErrorCode::TruncatedFile,
                "trailing bytes past the declared records: " +
                    std::to_string(body - expected_body));

  file.samples.resize(ns);
  for (int s = 0; s < ns; ++s)
    file.samples[s].reserve(static_cast<std::size_t>(h.num_records) *
                            file.signals[s].samples_per_record);

  for (long rec = 0; rec < h.num_records; ++rec) {
    for (int s = 0; s < ns; ++s) {
      const SignalSpec& spec = file.signals[s];
      for (int i = 0; i < spec.samples_per_record; ++i)
        file.samples[s].push_back(physical_value(r.i16le(), spec));
    }
  }
  return file;
}

Bytes write_edf(const EdfFile& file) {
  const int ns = static_cast<int>(file.signals.size());
  if (file.header.num_signals != 0 && file.header.num_signals != ns)
    throw Error(ErrorCode::MalformedField,
                "header num_signals disagrees with signal list");
  if (file.samples.size() != file.signals.size())
    throw Error(ErrorCode::MalformedField, "samples/signals length mismatch");

  long num_records = file.header.num_records;
  // derive the record count from the data when the header leaves it at 0
  if (num_records == 0 && ns > 0 && file.signals[0].samples_per_record > 0)
    num_records = static_cast<long>(file.samples[0].size()) /
                  file.signals[0].samples_per_record;

  for (int s = 0; s < ns; ++s) {
    const SignalSpec& spec = file.signals[s];
    if (spec.samples_per_record <= 0)
      throw Error(ErrorCode::MalformedField, "samples_per_record must be positive");
    if (file.samples[s].size() !=
        static_cast<std::size_t>(num_records) * spec.samples_per_record)
      throw Error(ErrorCode::MalformedField,
                  "signal '" + spec.label + "' sample count does not equal " +
                      "num_records * samples_per_record");
  }

  Bytes out;
  out.reserve(kFixedHeaderBytes + kPerSignalHeaderBytes * ns);

  const EdfHeader& h = file.header;
  put_field(out, h.version.empty() ? "0" : h.version, 8, "version");
  put_field(out, h.patient_id, 80, "patient_id");
  put_field(out, h.recording_id, 80, "recording_id");
  put_field(out, h.start_date, 8, "start_date");
  put_field(out, h.start_time, 8, "start_time");
  put_number(out, static_cast<long>(kFixedHeaderBytes + kPerSignalHeaderBytes * ns),
             8, "header_bytes");
  put_field(out, h.reserved, 44, "reserved");
  put_number(out, num_records, 8, "num_records");
  put_number(out, h.record_duration_s, 8, "record_duration");
  put_field(out, std::to_string(ns), 4, "num_signals");

  for (const SignalSpec& s : file.signals) put_field(out, s.label, 16, "label");
  for (const SignalSpec& s : file.signals) put_field(out, s.transducer, 80, "transducer");
  for (const SignalSpec& s : file.signals) put_field(out, s.physical_dim, 8, "physical_dim");
  for (const SignalSpec& s : file.signals) put_number(out, s.physical_min, 8, "physical_min");
  for (const SignalSpec& s : file.signals) put_number(out, s.physical_max, 8, "physical_max");
  for (const SignalSpec& s : file.signals)
    put_number(out, static_cast<long>(s.digital_min), 8, "digital_min");
  for (const SignalSpec& s : file.signals)
    put_number(out, static_cast<long>(s.digital_max), 8, "digital_max");
  for (const SignalSpec& s : file.signals) put_field(out, s.prefiltering, 80, "prefiltering");
  for (const SignalSpec& s : file.signals)
    put_number(out, static_cast<long>(s.samples_per_record), 8, "samples_per_record");
  for (const SignalSpec& s : file.signals) put_field(out, s.reserved, 32, "reserved");

  for (long rec = 0; rec < num_records; ++rec) {
    for (int s = 0; s < ns; ++s) {
      const SignalSpec& spec = file.signals[s];
      const std::size_t base = static_cast<std::size_t>(rec) * spec.samples_per_record;
      for (int i = 0; i < spec.samples_per_record; ++i) {
        const int d = digital_value(file.samples[s][base + i], spec);
        put_u16le(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(d)));
      }
    }
  }
  return out;
}

EdfFile read_edf_file(const std::string& path) { return parse_edf(read_file(path)); }

void write_edf_file(const std::string& path, const EdfFile& file) {
  write_file(path, write_edf(file));
}

}  // namespace ied::edf

#ifndef IED_EDF_HPP
#define IED_EDF_HPP

#include <string>
#include <vector>

#include "ied/common.hpp"

namespace ied::edf {

// Fixed 256-byte EDF header. Text fields are stored trimmed of the
// space padding the wire format uses.
struct EdfHeader {
  std::string version = "0";
  std::string patient_id;    // up to 80 chars
  std::string recording_id;  // up to 80 chars
  std::string start_date = "01.01.00";  // dd.mm.yy
  std::string start_time = "00.00.00";  // hh.mm.ss
  int header_bytes = 0;      // 256 + 256 * num_signals
  std::string reserved;      // 44-char reserved block
  long num_records = 0;
  double record_duration_s = 1.0;
  int num_signals = 0;
};

struct SignalSpec {
  std::string label;          // up to 16 chars
  std::string transducer;     // up to 80 chars
  std::string physical_dim;   // up to 8 chars, e.g. "uV"
  double physical_min = -1000.0;
  double physical_max = 1000.0;
  int digital_min = -32768;
  int digital_max = 32767;
  std::string prefiltering;   // up to 80 chars
  int samples_per_record = 0;
  std::string reserved;       // 32-char reserved block
};

struct EdfFile {
  EdfHeader header;
  std::vector<SignalSpec> signals;
  // samples[s] holds num_records * samples_per_record physical-unit values
  std::vector<std::vector<double>> samples;
};

// Affine digital->physical scaling:
//   physical_min + (d - digital_min) * (physical_max - physical_min)
//                                    / (digital_max - digital_min)
double physical_value(int digital, const SignalSpec& spec);

// Inverse scaling, rounded half-away-from-zero. Throws RangeOverflow when
// the sample lies outside [physical_min, physical_max].
int digital_value(double physical, const SignalSpec& spec);

// Half a quantization step for a signal, the round-trip error bound.
double quantization_step(const SignalSpec& spec);

EdfFile parse_edf(const Bytes& bytes);
Bytes write_edf(const EdfFile& file);

EdfFile read_edf_file(const std::string& path);
void write_edf_file(const std::string& path, const EdfFile& file);

}  // namespace ied::edf

#endif  // IED_EDF_HPP

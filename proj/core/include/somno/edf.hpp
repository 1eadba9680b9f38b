#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace somno {

// Uniformly sampled signal in physical units (µV for EEG).
struct SampleSeries {
  std::vector<double> samples;
  double sampling_rate = 0.0;
  std::string label;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sampling_rate;
  }
};

// Per-signal header block of an EDF file.
struct SignalSpec {
  std::string label;
  std::string transducer;
  std::string physical_dim;
  double phys_min = 0.0;
  double phys_max = 0.0;
  int dig_min = 0;
  int dig_max = 0;
  std::string prefilter;
  int samples_per_record = 0;
  std::string reserved;

  // Physical units per digital step.
  double gain() const {
    return (phys_max - phys_min) / static_cast<double>(dig_max - dig_min);
  }
  double to_physical(int digital) const {
    return phys_min + static_cast<double>(digital - dig_min) *
                          (phys_max - phys_min) /
                          static_cast<double>(dig_max - dig_min);
  }
};

struct EdfHeader {
  std::string version = "0";
  std::string patient_id;
  std::string recording_id;
  std::string start_date = "01.01.00";  // dd.mm.yy
  std::string start_time = "00.00.00";  // hh.mm.ss
  int header_bytes = 0;
  std::string reserved;
  std::int64_t n_records = 0;
  double record_duration_s = 0.0;
  std::vector<SignalSpec> signals;

  std::size_t n_signals() const { return signals.size(); }
  // Bytes occupied by one data record (all signals interleaved).
  std::size_t record_bytes() const;
  double duration_s() const {
    return static_cast<double>(n_records) * record_duration_s;
  }
  double sampling_rate(std::size_t signal) const {
    return signals.at(signal).samples_per_record / record_duration_s;
  }
};

inline constexpr std::size_t kEdfMainHeaderBytes = 256;
inline constexpr std::size_t kEdfSignalHeaderBytes = 256;

// Decodes the fixed-width text header. Reads at most header_bytes bytes.
// Throws somno::Error on truncation, non-numeric numeric fields, an
// inconsistent header_bytes, or an invalid signal range.
EdfHeader parse_header(std::string_view raw);

// Exact inverse of parse_header for headers whose fields fit their widths.
std::string serialize_header(const EdfHeader& header);

// An EDF file held in memory.
class EdfRecording {
 public:
  static EdfRecording from_bytes(std::string bytes);
  static EdfRecording load(const std::filesystem::path& path);

  const EdfHeader& header() const { return header_; }
  const std::string& bytes() const { return bytes_; }

 private:
  EdfRecording(EdfHeader header, std::string bytes)
      : header_(std::move(header)), bytes_(std::move(bytes)) {}

  EdfHeader header_;
  std::string bytes_;
};

// Signal chosen by exact (trimmed) label or by zero-based index.
using SignalSelector = std::variant<std::string, std::size_t>;

// Half-open range of data records; count = nullopt means "to the end".
struct RecordRange {
  std::size_t first = 0;
  std::optional<std::size_t> count;
};

std::size_t resolve_signal(const EdfHeader& header,
                           const SignalSelector& selector);

SampleSeries read_signal(const EdfRecording& recording,
                         const SignalSelector& selector,
                         RecordRange range = {});

// One signal to be written: its header block plus physical samples.
struct SignalData {
  SignalSpec spec;
  std::span<const double> samples;
};

struct RecordingFields {
  std::string patient_id;
  std::string recording_id;
  std::string start_date = "01.01.00";
  std::string start_time = "00.00.00";
  double record_duration_s = 30.0;
};

// Serializes signals into an EDF byte stream. Physical values are quantized
// with round-half-away-from-zero; values outside [phys_min, phys_max] and
// lengths that are not a whole number of records are errors.
std::string write_recording(std::span<const SignalData> signals,
                            const RecordingFields& fields);
void write_recording(std::span<const SignalData> signals,
                     const RecordingFields& fields, std::ostream& out);

// Quantizes one physical value against spec; throws when out of range.
int to_digital(const SignalSpec& spec, double physical);

// EEG channel block used by fixtures and the synth tool: ±250 µV over the
// full 16-bit range.
SignalSpec eeg_signal_spec(std::string label, int samples_per_record,
                           double phys_limit_uv = 250.0);

}  // namespace somno

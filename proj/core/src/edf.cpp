#include "somno/edf.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "somno/error.hpp"

namespace somno {

namespace {

constexpr int kBytesPerSample = 2;

// Widths of the per-signal arrays, in file order.
constexpr std::size_t kLabelWidth = 16;
constexpr std::size_t kTransducerWidth = 80;
constexpr std::size_t kDimWidth = 8;
constexpr std::size_t kNumberWidth = 8;
constexpr std::size_t kPrefilterWidth = 80;
constexpr std::size_t kSignalReservedWidth = 32;

std::string_view trim(std::string_view s) {
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

// Sequential reader over fixed-width fields.
class FieldReader {
 public:
  explicit FieldReader(std::string_view raw) : raw_(raw) {}

  std::string_view take(std::size_t width, std::string_view field) {
    if (pos_ + width > raw_.size()) {
      throw Error("EDF header truncated while reading field '" +
                  std::string(field) + "'");
    }
    std::string_view v = raw_.substr(pos_, width);
    pos_ += width;
    return v;
  }

  std::string text(std::size_t width, std::string_view field) {
    std::string_view v = take(width, field);
    while (!v.empty() && v.back() == ' ') v.remove_suffix(1);
    return std::string(v);
  }

  template <typename Int>
  Int integer(std::size_t width, std::string_view field) {
    const std::string_view v = trim(take(width, field));
    Int out{};
    const char* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data() + (!v.empty() && v[0] == '+'),
                                     end, out);
    if (v.empty() || ec != std::errc() || ptr != end) {
      throw Error("EDF header field '" + std::string(field) +
                  "' is not an integer: '" + std::string(v) + "'");
    }
    return out;
  }

  double decimal(std::size_t width, std::string_view field) {
    const std::string_view v = trim(take(width, field));
    double out = 0.0;
    const char* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data() + (!v.empty() && v[0] == '+'),
                                     end, out);
    if (v.empty() || ec != std::errc() || ptr != end || !std::isfinite(out)) {
      throw Error("EDF header field '" + std::string(field) +
                  "' is not a number: '" + std::string(v) + "'");
    }
    return out;
  }

  std::size_t position() const { return pos_; }

 private:
  std::string_view raw_;
  std::size_t pos_ = 0;
};

void put_text(std::string& out, std::string_view value, std::size_t width,
              std::string_view field) {
  if (value.size() > width) {
    throw Error("EDF field '" + std::string(field) + "' longer than " +
                std::to_string(width) + " characters: '" + std::string(value) +
                "'");
  }
  for (char c : value) {
    if (c < 0x20 || c > 0x7e) {
      throw Error("EDF field '" + std::string(field) +
                  "' contains a non-printable character");
    }
  }
  out.append(value);
  out.append(width - value.size(), ' ');
}

std::string format_integer(std::int64_t v) { return std::to_string(v); }

// Shortest rendering of v that fits the field; integral values print
// without a decimal point.
std::string format_decimal(double v, std::size_t width) {
  if (v == std::floor(v) && std::fabs(v) < 1e15) {
    std::string s = std::to_string(static_cast<std::int64_t>(v));
    if (s.size() <= width) return s;
  }
  char buf[64];
  for (int precision = 17; precision >= 1; --precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::string_view(buf).size() <= width) return buf;
  }
  throw Error("cannot fit value " + std::to_string(v) + " into " +
              std::to_string(width) + " characters");
}

void validate(const EdfHeader& h) {
  if (h.signals.empty()) throw Error("EDF header declares no signals");
  const auto expected = static_cast<int>(kEdfMainHeaderBytes +
                                         kEdfSignalHeaderBytes * h.n_signals());
  if (h.header_bytes != expected) {
    throw Error("EDF header_bytes " + std::to_string(h.header_bytes) +
                " inconsistent with " + std::to_string(h.n_signals()) +
                " signals (expected " + std::to_string(expected) + ")");
  }
  if (h.n_records < 0) {
    throw Error("EDF n_records must be non-negative, got " +
                std::to_string(h.n_records));
  }
  if (!(h.record_duration_s > 0.0)) {
    throw Error("EDF record duration must be positive");
  }
  for (const SignalSpec& s : h.signals) {
    if (s.dig_min >= s.dig_max) {
      throw Error("signal '" + s.label + "': inverted digital range (dig_min " +
                  std::to_string(s.dig_min) + " >= dig_max " +
                  std::to_string(s.dig_max) + ")");
    }
    if (s.dig_min < INT16_MIN || s.dig_max > INT16_MAX) {
      throw Error("signal '" + s.label +
                  "': digital range exceeds 16-bit samples");
    }
    if (s.phys_min == s.phys_max) {
      throw Error("signal '" + s.label + "': empty physical range");
    }
    if (s.samples_per_record < 1) {
      throw Error("signal '" + s.label + "': samples_per_record must be >= 1");
    }
  }
}

}  // namespace

std::size_t EdfHeader::record_bytes() const {
  std::size_t n = 0;
  for (const SignalSpec& s : signals) {
    n += static_cast<std::size_t>(s.samples_per_record) * kBytesPerSample;
  }
  return n;
}

EdfHeader parse_header(std::string_view raw) {
  if (raw.size() < kEdfMainHeaderBytes) {
    throw Error("EDF header truncated: " + std::to_string(raw.size()) +
                " bytes, need at least 256");
  }
  FieldReader r(raw.substr(0, kEdfMainHeaderBytes));
  EdfHeader h;
  h.version = r.text(8, "version");
  h.patient_id = r.text(80, "patient_id");
  h.recording_id = r.text(80, "recording_id");
  h.start_date = r.text(8, "start_date");
  h.start_time = r.text(8, "start_time");
  h.header_bytes = r.integer<int>(8, "header_bytes");
  h.reserved = r.text(44, "reserved");
  h.n_records = r.integer<std::int64_t>(8, "n_records");
  h.record_duration_s = r.decimal(8, "record_duration");
  const int ns = r.integer<int>(4, "n_signals");
  if (ns < 1) throw Error("EDF header declares no signals");

  const std::size_t total =
      kEdfMainHeaderBytes + kEdfSignalHeaderBytes * static_cast<std::size_t>(ns);
  if (h.header_bytes >= 0 && static_cast<std::size_t>(h.header_bytes) != total) {
    throw Error("EDF header_bytes " + std::to_string(h.header_bytes) +
                " inconsistent with " + std::to_string(ns) +
                " signals (expected " + std::to_string(total) + ")");
  }
  if (raw.size() < total) {
    throw Error("EDF header truncated: signal headers need " +
                std::to_string(total) + " bytes, have " +
                std::to_string(raw.size()));
  }

  FieldReader s(raw.substr(kEdfMainHeaderBytes, total - kEdfMainHeaderBytes));
  h.signals.resize(static_cast<std::size_t>(ns));
  // Each field is stored as an array over all signals.
  for (auto& sig : h.signals) sig.label = s.text(kLabelWidth, "label");
  for (auto& sig : h.signals) {
    sig.transducer = s.text(kTransducerWidth, "transducer");
  }
  for (auto& sig : h.signals) {
    sig.physical_dim = s.text(kDimWidth, "physical_dim");
  }
  for (auto& sig : h.signals) sig.phys_min = s.decimal(kNumberWidth, "phys_min");
  for (auto& sig : h.signals) sig.phys_max = s.decimal(kNumberWidth, "phys_max");
  for (auto& sig : h.signals) sig.dig_min = s.integer<int>(kNumberWidth, "dig_min");
  for (auto& sig : h.signals) sig.dig_max = s.integer<int>(kNumberWidth, "dig_max");
  for (auto& sig : h.signals) {
    sig.prefilter = s.text(kPrefilterWidth, "prefilter");
  }
  for (auto& sig : h.signals) {
    sig.samples_per_record = s.integer<int>(kNumberWidth, "samples_per_record");
  }
  for (auto& sig : h.signals) {
    sig.reserved = s.text(kSignalReservedWidth, "signal_reserved");
  }

  validate(h);
  return h;
}

std::string serialize_header(const EdfHeader& h) {
  validate(h);
  std::string out;
  out.reserve(static_cast<std::size_t>(h.header_bytes));
  put_text(out, h.version, 8, "version");
  put_text(out, h.patient_id, 80, "patient_id");
  put_text(out, h.recording_id, 80, "recording_id");
  put_text(out, h.start_date, 8, "start_date");
  put_text(out, h.start_time, 8, "start_time");
  put_text(out, format_integer(h.header_bytes), 8, "header_bytes");
  put_text(out, h.reserved, 44, "reserved");
  put_text(out, format_integer(h.n_records), 8, "n_records");
  put_text(out, format_decimal(h.record_duration_s, 8), 8, "record_duration");
  put_text(out, format_integer(static_cast<std::int64_t>(h.n_signals())), 4,
           "n_signals");

  for (const auto& sig : h.signals) put_text(out, sig.label, kLabelWidth, "label");
  for (const auto& sig : h.signals) {
    put_text(out, sig.transducer, kTransducerWidth, "transducer");
  }
  for (const auto& sig : h.signals) {
    put_text(out, sig.physical_dim, kDimWidth, "physical_dim");
  }
  for (const auto& sig : h.signals) {
    put_text(out, format_decimal(sig.phys_min, kNumberWidth), kNumberWidth,
             "phys_min");
  }
  for (const auto& sig : h.signals) {
    put_text(out, format_decimal(sig.phys_max, kNumberWidth), kNumberWidth,
             "phys_max");
  }
  for (const auto& sig : h.signals) {
    put_text(out, format_integer(sig.dig_min), kNumberWidth, "dig_min");
  }
  for (const auto& sig : h.signals) {
    put_text(out, format_integer(sig.dig_max), kNumberWidth, "dig_max");
  }
  for (const auto& sig : h.signals) {
    put_text(out, sig.prefilter, kPrefilterWidth, "prefilter");
  }
  for (const auto& sig : h.signals) {
    put_text(out, format_integer(sig.samples_per_record), kNumberWidth,
             "samples_per_record");
  }
  for (const auto& sig : h.signals) {
    put_text(out, sig.reserved, kSignalReservedWidth, "signal_reserved");
  }
  return out;
}

EdfRecording EdfRecording::from_bytes(std::string bytes) {
  EdfHeader header = parse_header(bytes);
  return EdfRecording(std::move(header), std::move(bytes));
}

EdfRecording EdfRecording::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open EDF file '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  try {
    return from_bytes(std::move(bytes));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::size_t resolve_signal(const EdfHeader& header,
                           const SignalSelector& selector) {
  if (const auto* index = std::get_if<std::size_t>(&selector)) {
    if (*index >= header.n_signals()) {
      throw Error("signal index " + std::to_string(*index) +
                  " out of range (file has " +
                  std::to_string(header.n_signals()) + " signals)");
    }
    return *index;
  }
  const std::string_view wanted = trim(std::get<std::string>(selector));
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < header.n_signals(); ++i) {
    if (trim(header.signals[i].label) != wanted) continue;
    if (found) {
      throw Error("ambiguous signal label '" + std::string(wanted) + "'");
    }
    found = i;
  }
  if (!found) throw Error("unknown signal label '" + std::string(wanted) + "'");
  return *found;
}

SampleSeries read_signal(const EdfRecording& recording,
                         const SignalSelector& selector, RecordRange range) {
  const EdfHeader& h = recording.header();
  const std::size_t sig = resolve_signal(h, selector);
  const auto n_records = static_cast<std::size_t>(h.n_records);
  const std::size_t count = range.count.value_or(
      range.first <= n_records ? n_records - range.first : 0);
  if (range.first > n_records || count > n_records - range.first) {
    throw Error("record range [" + std::to_string(range.first) + ", " +
                std::to_string(range.first + count) + ") outside " +
                std::to_string(n_records) + " records");
  }

  const std::size_t record_bytes = h.record_bytes();
  const auto header_bytes = static_cast<std::size_t>(h.header_bytes);
  const std::string& bytes = recording.bytes();
  if (bytes.size() < header_bytes + n_records * record_bytes) {
    throw Error("EDF data section shorter than header promises: " +
                std::to_string(bytes.size() - std::min(bytes.size(), header_bytes)) +
                " bytes for " + std::to_string(n_records) + " records of " +
                std::to_string(record_bytes) + " bytes");
  }

  std::size_t offset_in_record = 0;
  for (std::size_t i = 0; i < sig; ++i) {
    offset_in_record +=
        static_cast<std::size_t>(h.signals[i].samples_per_record) *
        kBytesPerSample;
  }
  const SignalSpec& spec = h.signals[sig];
  const auto spr = static_cast<std::size_t>(spec.samples_per_record);

  SampleSeries out;
  out.label = spec.label;
  out.sampling_rate = h.sampling_rate(sig);
  out.samples.reserve(count * spr);
  for (std::size_t r = range.first; r < range.first + count; ++r) {
    const char* p = bytes.data() + header_bytes + r * record_bytes +
                    offset_in_record;
    for (std::size_t k = 0; k < spr; ++k, p += kBytesPerSample) {
      const auto lo = static_cast<unsigned char>(p[0]);
      const auto hi = static_cast<unsigned char>(p[1]);
      const auto digital =
          static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
      out.samples.push_back(spec.to_physical(digital));
    }
  }
  return out;
}

int to_digital(const SignalSpec& spec, double physical) {
  const double lo = std::min(spec.phys_min, spec.phys_max);
  const double hi = std::max(spec.phys_min, spec.phys_max);
  if (!(physical >= lo && physical <= hi)) {
    throw Error("signal '" + spec.label + "': physical value " +
                std::to_string(physical) + " outside [" + std::to_string(lo) +
                ", " + std::to_string(hi) + "]");
  }
  const double d = (physical - spec.phys_min) *
                       static_cast<double>(spec.dig_max - spec.dig_min) /
                       (spec.phys_max - spec.phys_min) +
                   spec.dig_min;
  return std::clamp(static_cast<int>(std::round(d)), spec.dig_min, spec.dig_max);
}

std::string write_recording(std::span<const SignalData> signals,
                            const RecordingFields& fields) {
  if (signals.empty()) throw Error("cannot write an EDF file without signals");

  EdfHeader h;
  h.patient_id = fields.patient_id;
  h.recording_id = fields.recording_id;
  h.start_date = fields.start_date;
  h.start_time = fields.start_time;
  h.record_duration_s = fields.record_duration_s;
  h.header_bytes = static_cast<int>(kEdfMainHeaderBytes +
                                    kEdfSignalHeaderBytes * signals.size());

  std::optional<std::size_t> n_records;
  for (const SignalData& s : signals) {
    const auto spr = static_cast<std::size_t>(s.spec.samples_per_record);
    if (spr == 0 || s.samples.size() % spr != 0) {
      throw Error("signal '" + s.spec.label + "': " +
                  std::to_string(s.samples.size()) +
                  " samples is not a multiple of samples_per_record " +
                  std::to_string(s.spec.samples_per_record));
    }
    const std::size_t records = s.samples.size() / spr;
    if (n_records && *n_records != records) {
      throw Error("signals span different numbers of records (" +
                  std::to_string(*n_records) + " vs " +
                  std::to_string(records) + ")");
    }
    n_records = records;
    h.signals.push_back(s.spec);
  }
  h.n_records = static_cast<std::int64_t>(*n_records);

  // Quantize against the header as a reader will see it, so that decimal
  // fields rounded to fit their width cannot skew the digital mapping.
  std::string out = serialize_header(h);
  const EdfHeader canonical = parse_header(out);

  std::vector<std::vector<std::int16_t>> digital(signals.size());
  for (std::size_t i = 0; i < signals.size(); ++i) {
    digital[i].reserve(signals[i].samples.size());
    for (double v : signals[i].samples) {
      digital[i].push_back(
          static_cast<std::int16_t>(to_digital(canonical.signals[i], v)));
    }
  }

  out.reserve(out.size() + *n_records * canonical.record_bytes());
  for (std::size_t r = 0; r < *n_records; ++r) {
    for (std::size_t i = 0; i < signals.size(); ++i) {
      const auto spr = static_cast<std::size_t>(canonical.signals[i].samples_per_record);
      for (std::size_t k = r * spr; k < (r + 1) * spr; ++k) {
        const auto u = static_cast<std::uint16_t>(digital[i][k]);
        out.push_back(static_cast<char>(u & 0xff));
        out.push_back(static_cast<char>(u >> 8));
      }
    }
  }
  return out;
}

void write_recording(std::span<const SignalData> signals,
                     const RecordingFields& fields, std::ostream& out) {
  const std::string bytes = write_recording(signals, fields);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

SignalSpec eeg_signal_spec(std::string label, int samples_per_record,
                           double phys_limit_uv) {
  SignalSpec s;
  s.label = std::move(label);
  s.transducer = "AgAgCl electrode";
  s.physical_dim = "uV";
  s.phys_min = -phys_limit_uv;
  s.phys_max = phys_limit_uv;
  s.dig_min = INT16_MIN;
  s.dig_max = INT16_MAX;
  s.prefilter = "";
  s.samples_per_record = samples_per_record;
  return s;
}

}  // namespace somno

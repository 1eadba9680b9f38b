#include "somno/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

namespace somno {

namespace {

constexpr std::array<std::string_view, kNumBands> kBandNames = {
    "delta", "theta", "alpha", "sigma", "beta"};

// FFTW planning is not thread-safe; plans are created once per length under
// a lock and then executed concurrently through the new-array interface.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan r2c(std::size_t n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    std::vector<double> in(n);
    std::vector<std::complex<double>> out(n / 2 + 1);
    fftw_plan plan = fftw_plan_dft_r2c_1d(
        static_cast<int>(n), in.data(),
        reinterpret_cast<fftw_complex*>(out.data()),
        FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_PRESERVE_INPUT);
    if (plan == nullptr) throw Error("FFT planning failed for length " + std::to_string(n));
    plans_.emplace(n, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [n, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::size_t, fftw_plan> plans_;
};

// Non-negative-frequency half of the DFT, N/2 + 1 coefficients.
std::vector<std::complex<double>> half_spectrum(std::span<const double> x) {
  const fftw_plan plan = PlanCache::instance().r2c(x.size());
  std::vector<double> in(x.begin(), x.end());
  std::vector<std::complex<double>> out(x.size() / 2 + 1);
  fftw_execute_dft_r2c(plan, in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

// Relative slack for comparing a bin frequency with a band edge; bin
// frequencies are k / duration, so edges at whole hertz land exactly on a bin
// up to rounding.
constexpr double kEdgeSlack = 1e-6;

std::string format_value(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string_view band_name(Band b) {
  return kBandNames[static_cast<std::size_t>(b)];
}

std::size_t samples_per_epoch(double sampling_rate, double duration_s) {
  if (!(sampling_rate > 0.0) || !(duration_s > 0.0)) {
    throw Error("sampling rate and epoch duration must be positive");
  }
  const double n = sampling_rate * duration_s;
  const double rounded = std::round(n);
  if (std::fabs(n - rounded) > 1e-9 * std::max(1.0, n) || rounded < 1.0) {
    throw Error("epoch of " + std::to_string(duration_s) + " s at " +
                std::to_string(sampling_rate) +
                " Hz is not a whole number of samples");
  }
  return static_cast<std::size_t>(rounded);
}

std::vector<Epoch> segment_epochs(const SampleSeries& series,
                                  double duration_s) {
  const std::size_t n = samples_per_epoch(series.sampling_rate, duration_s);
  std::vector<Epoch> epochs;
  const std::size_t count = series.samples.size() / n;
  epochs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto first = series.samples.begin() + static_cast<std::ptrdiff_t>(i * n);
    epochs.push_back(Epoch{i, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n)),
                           series.sampling_rate, duration_s});
  }
  return epochs;
}

std::vector<std::complex<double>> dft(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n == 0) return {};
  std::vector<std::complex<double>> full = half_spectrum(samples);
  full.resize(n);
  for (std::size_t k = n / 2 + 1; k < n; ++k) full[k] = std::conj(full[n - k]);
  return full;
}

std::vector<double> full_power(std::span<const double> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& c : dft(samples)) out.push_back(std::norm(c));
  return out;
}

std::optional<Band> band_of(double f, double resolution_hz) {
  const double slack = kEdgeSlack * resolution_hz;
  if (f < kMinRetainedHz - slack || f > kMaxRetainedHz + slack) {
    return std::nullopt;
  }
  for (std::size_t b = 0; b < kNumBands; ++b) {
    if (f <= kBandEdges[b].hi_hz + slack) return static_cast<Band>(b);
  }
  return std::nullopt;
}

Spectrum power_spectrum(std::span<const double> samples,
                        double sampling_rate) {
  const std::size_t n = samples.size();
  if (n < 2) throw Error("power spectrum needs at least 2 samples");
  if (!(sampling_rate > 0.0)) throw Error("sampling rate must be positive");

  const auto half = half_spectrum(samples);
  Spectrum s;
  s.resolution_hz = sampling_rate / static_cast<double>(n);
  const double slack = kEdgeSlack * s.resolution_hz;
  bool first = true;
  for (std::size_t k = 0; k < half.size(); ++k) {
    // Bins 1..ceil(N/2)-1 have a mirror image at N - k.
    const bool mirrored = k != 0 && 2 * k != n;
    s.total_power += (mirrored ? 2.0 : 1.0) * std::norm(half[k]);
  }
  for (std::size_t k = 0; k < half.size(); ++k) {
    const double f = static_cast<double>(k) * sampling_rate / static_cast<double>(n);
    if (f < kMinRetainedHz - slack) continue;
    if (f > kMaxRetainedHz + slack) break;
    if (first) {
      s.first_bin = k;
      first = false;
    }
    s.bin_hz.push_back(f);
    s.power.push_back(std::norm(half[k]));
  }
  return s;
}

Spectrum power_spectrum(const Epoch& epoch) {
  return power_spectrum(epoch.samples, epoch.sampling_rate);
}

std::array<double, kNumBands> band_powers(const Spectrum& spectrum) {
  std::array<double, kNumBands> bsp{};
  for (std::size_t i = 0; i < spectrum.power.size(); ++i) {
    const auto band = band_of(spectrum.bin_hz[i], spectrum.resolution_hz);
    if (band) bsp[static_cast<std::size_t>(*band)] += spectrum.power[i];
  }
  return bsp;
}

SpectralFeatures relative_band_powers(const Spectrum& spectrum) {
  const auto bsp = band_powers(spectrum);
  double tsp = 0.0;
  for (double p : bsp) tsp += p;
  if (!std::isfinite(tsp) || !(tsp > kNegligiblePower * spectrum.total_power) ||
      !(tsp > 0.0)) {
    throw UnclassifiableEpoch("epoch has no spectral power in [0.5, 32] Hz");
  }
  SpectralFeatures f;
  for (std::size_t b = 0; b < kNumBands; ++b) f.rsp[b] = bsp[b] / tsp;
  return f;
}

std::optional<SpectralFeatures> epoch_features(const Epoch& epoch) {
  try {
    return relative_band_powers(power_spectrum(epoch));
  } catch (const UnclassifiableEpoch&) {
    return std::nullopt;
  }
}

std::vector<FeatureRow> extract_features(std::span<const SampleSeries> channels,
                                         double duration_s) {
  if (channels.empty()) throw Error("feature extraction needs at least one channel");
  std::vector<std::vector<Epoch>> epochs;
  for (const SampleSeries& s : channels) epochs.push_back(segment_epochs(s, duration_s));
  const std::size_t count = epochs.front().size();
  for (std::size_t c = 1; c < epochs.size(); ++c) {
    if (epochs[c].size() != count) {
      throw Error("channels '" + channels[0].label + "' and '" +
                  channels[c].label + "' cover different numbers of epochs");
    }
  }

  const std::size_t width = kNumBands * channels.size();
  std::vector<FeatureRow> rows(count, FeatureRow(width));
  auto fill = [&](std::size_t begin, std::size_t end) {
    for (std::size_t e = begin; e < end; ++e) {
      for (std::size_t c = 0; c < channels.size(); ++c) {
        const auto f = epoch_features(epochs[c][e]);
        for (std::size_t b = 0; b < kNumBands; ++b) {
          rows[e][c * kNumBands + b] =
              f ? f->rsp[b] : std::numeric_limits<double>::quiet_NaN();
        }
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(
      std::thread::hardware_concurrency(), 1, std::max<std::size_t>(1, count / 16));
  if (workers <= 1) {
    fill(0, count);
    return rows;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t begin = 0; begin < count; begin += chunk) {
    pool.emplace_back(fill, begin, std::min(count, begin + chunk));
  }
  return rows;
}

void write_feature_file(std::ostream& out, std::span<const FeatureRow> rows) {
  const std::size_t width = rows.empty() ? kNumBands : rows.front().size();
  if (width == 0 || width % kNumBands != 0) {
    throw Error("feature rows must hold five values per channel");
  }
  out << "epoch";
  for (std::size_t c = 0; c < width / kNumBands; ++c) {
    for (std::size_t b = 0; b < kNumBands; ++b) {
      out << ',' << kBandNames[b];
      if (c > 0) out << '_' << (c + 1);
    }
  }
  out << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != width) throw Error("feature rows differ in width");
    out << i;
    for (double v : rows[i]) out << ',' << format_value(v);
    out << '\n';
  }
}

std::vector<FeatureRow> read_feature_file(std::istream& in,
                                          std::string_view source) {
  const auto where = [&](std::size_t line) {
    return std::string(source) + ":" + std::to_string(line) + ": ";
  };
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool have_header = false;
  std::vector<FeatureRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string_view> cells;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      cells.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }

    if (!have_header) {
      if (cells.empty() || cells.front() != "epoch" || cells.size() < 2 ||
          (cells.size() - 1) % kNumBands != 0) {
        throw Error(where(line_no) +
                    "expected header 'epoch,delta,theta,alpha,sigma,beta'");
      }
      width = cells.size() - 1;
      have_header = true;
      continue;
    }
    if (cells.size() != width + 1) {
      throw Error(where(line_no) + "expected " + std::to_string(width + 1) +
                  " columns, found " + std::to_string(cells.size()));
    }
    std::size_t epoch = 0;
    {
      auto [ptr, ec] = std::from_chars(cells[0].data(),
                                       cells[0].data() + cells[0].size(), epoch);
      if (ec != std::errc() || ptr != cells[0].data() + cells[0].size() ||
          epoch != rows.size()) {
        throw Error(where(line_no) + "epoch column must count up from 0");
      }
    }
    FeatureRow row(width);
    for (std::size_t j = 0; j < width; ++j) {
      const std::string_view cell = cells[j + 1];
      if (cell == "nan") {
        row[j] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), row[j]);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw Error(where(line_no) + "not a number: '" + std::string(cell) + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw Error(std::string(source) + ": empty feature file");
  return rows;
}

}  // namespace somno

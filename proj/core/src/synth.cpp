#include "somno/synth.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "somno/error.hpp"
#include "somno/random.hpp"

namespace somno {

namespace {

std::size_t retained_bins(std::size_t n, double sampling_rate) {
  const double resolution = sampling_rate / static_cast<double>(n);
  std::size_t count = 0;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    if (band_of(static_cast<double>(k) * resolution, resolution)) ++count;
  }
  return count;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

}  // namespace

void validate(const StageProfile& p) {
  double sum = 0.0;
  for (double w : p.band_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error("profile " + std::string(stage_name(p.stage)) +
                  ": band weights must be non-negative");
    }
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw Error("profile " + std::string(stage_name(p.stage)) +
                ": band weights sum to " + std::to_string(sum) + ", not 1");
  }
  if (!(p.noise_fraction >= 0.0 && p.noise_fraction < 1.0)) {
    throw Error("profile " + std::string(stage_name(p.stage)) +
                ": noise fraction must lie in [0, 1)");
  }
}

std::size_t band_tone_bin(Band band, std::size_t n, double sampling_rate) {
  const double resolution = sampling_rate / static_cast<double>(n);
  std::size_t first = 0;
  std::size_t last = 0;
  bool found = false;
  // Bins strictly below Nyquist only: the Nyquist bin of a real tone does
  // not carry the usual (aN/2)² power.
  for (std::size_t k = 1; 2 * k < n; ++k) {
    if (band_of(static_cast<double>(k) * resolution, resolution) != band) continue;
    if (!found) first = k;
    last = k;
    found = true;
  }
  if (!found) {
    throw Error("band " + std::string(band_name(band)) +
                " has no DFT bin for this epoch length and sampling rate");
  }
  return (first + last) / 2;
}

Epoch synth_epoch(const StageProfile& profile, double sampling_rate,
                  double duration_s, std::uint64_t seed) {
  validate(profile);
  const std::size_t n = samples_per_epoch(sampling_rate, duration_s);
  const double nu = profile.noise_fraction;
  const double bins = static_cast<double>(retained_bins(n, sampling_rate));
  const double nn = static_cast<double>(n);

  // Tone amplitudes a_i = A √w_i put (A N / 2)² of power in the retained
  // band; white noise of variance σ² puts N σ² in each retained bin on
  // average. Solve for σ² at the requested noise share, then fix A by the
  // target RMS.
  const double noise_per_tone = nu * nn / (4.0 * bins * (1.0 - nu));  // σ² / A²
  const double amplitude =
      kSynthRmsMicrovolts / std::sqrt(0.5 + noise_per_tone);
  const double sigma = amplitude * std::sqrt(noise_per_tone);

  Random rng(seed);
  Epoch epoch;
  epoch.samples.assign(n, 0.0);
  epoch.sampling_rate = sampling_rate;
  epoch.duration_s = duration_s;
  for (std::size_t b = 0; b < kNumBands; ++b) {
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double w = profile.band_weights[b];
    if (w <= 0.0) continue;
    const double a = amplitude * std::sqrt(w);
    const auto k = static_cast<double>(band_tone_bin(static_cast<Band>(b), n, sampling_rate));
    for (std::size_t i = 0; i < n; ++i) {
      epoch.samples[i] +=
          a * std::cos(2.0 * std::numbers::pi * k * static_cast<double>(i) / nn + phase);
    }
  }
  if (sigma > 0.0) {
    for (double& x : epoch.samples) x += sigma * rng.normal();
  }
  return epoch;
}

SynthRecording synth_recording(std::span<const ProfileCount> plan,
                               double sampling_rate, std::uint64_t seed,
                               std::string label, double duration_s) {
  if (plan.empty()) throw Error("synthesis plan is empty");
  SynthRecording rec;
  rec.series.label = std::move(label);
  rec.series.sampling_rate = sampling_rate;
  rec.hypnogram.epoch_duration_s = duration_s;
  std::size_t j = 0;
  for (const ProfileCount& pc : plan) {
    for (std::size_t c = 0; c < pc.count; ++c, ++j) {
      Epoch e = synth_epoch(pc.profile, sampling_rate, duration_s, derive_seed(seed, j));
      rec.series.samples.insert(rec.series.samples.end(), e.samples.begin(),
                                e.samples.end());
      rec.hypnogram.labels.push_back(pc.profile.stage);
    }
  }
  return rec;
}

SynthDataset synth_dataset(std::span<const ProfileCount> plan,
                           double sampling_rate, std::uint64_t seed,
                           double duration_s) {
  SynthRecording rec = synth_recording(plan, sampling_rate, seed, "EEG", duration_s);
  const auto features = extract_features(std::span(&rec.series, 1), duration_s);
  SynthDataset out;
  out.dataset = build_dataset(features, rec.hypnogram);
  out.hypnogram = std::move(rec.hypnogram);
  return out;
}

std::vector<StageProfile> default_profiles() {
  using S = SleepStage;
  return {
      {S::Awake, {0.10, 0.15, 0.50, 0.10, 0.15}, 0.40},
      {S::S1, {0.25, 0.42, 0.07, 0.12, 0.14}, 0.40},
      {S::S2, {0.26, 0.40, 0.06, 0.16, 0.12}, 0.40},
      {S::S3, {0.64, 0.15, 0.06, 0.07, 0.08}, 0.40},
      {S::S4, {0.66, 0.14, 0.05, 0.07, 0.08}, 0.40},
      {S::REM, {0.24, 0.44, 0.08, 0.08, 0.16}, 0.40},
  };
}

std::vector<StageProfile> separable_profiles(double noise_fraction) {
  using S = SleepStage;
  return {
      {S::Awake, {0.05, 0.05, 0.80, 0.05, 0.05}, noise_fraction},
      {S::S1, {0.05, 0.80, 0.05, 0.05, 0.05}, noise_fraction},
      {S::S2, {0.05, 0.05, 0.05, 0.80, 0.05}, noise_fraction},
      {S::S3, {0.80, 0.05, 0.05, 0.05, 0.05}, noise_fraction},
      {S::S4, {0.05, 0.05, 0.05, 0.05, 0.80}, noise_fraction},
      {S::REM, {0.05, 0.40, 0.05, 0.05, 0.45}, noise_fraction},
  };
}

StageProfile movement_profile() {
  return {SleepStage::Movement, {0.2, 0.2, 0.2, 0.2, 0.2}, 0.9};
}

std::vector<StageProfile> read_profiles(std::istream& in, std::string_view source) {
  std::vector<StageProfile> out;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    std::vector<std::string_view> cells;
    std::string_view rest = text;
    while (true) {
      const auto comma = rest.find(',');
      cells.push_back(trim(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!have_header) {
      if (cells.size() != 7 || cells[0] != "stage") {
        throw Error(where + "expected header 'stage,delta,theta,alpha,sigma,beta,noise'");
      }
      have_header = true;
      continue;
    }
    if (cells.size() != 7) throw Error(where + "expected 7 columns");
    StageProfile p;
    auto stage = stage_from_name(cells[0]);
    if (!stage) stage = stage_from_token(cells[0]);
    if (!stage) throw Error(where + "unknown stage '" + std::string(cells[0]) + "'");
    p.stage = *stage;
    for (std::size_t j = 1; j < 7; ++j) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cells[j].data(), cells[j].data() + cells[j].size(), v);
      if (cells[j].empty() || ec != std::errc() || ptr != cells[j].data() + cells[j].size()) {
        throw Error(where + "not a number: '" + std::string(cells[j]) + "'");
      }
      (j < 6 ? p.band_weights[j - 1] : p.noise_fraction) = v;
    }
    try {
      validate(p);
    } catch (const Error& e) {
      throw Error(where + e.what());
    }
    out.push_back(p);
  }
  if (out.empty()) throw Error(std::string(source) + ": no profiles");
  return out;
}

void write_profiles(std::ostream& out, std::span<const StageProfile> profiles) {
  out << "stage,delta,theta,alpha,sigma,beta,noise\n";
  char buf[40];
  for (const auto& p : profiles) {
    out << stage_name(p.stage);
    for (double w : p.band_weights) {
      std::snprintf(buf, sizeof buf, "%.17g", w);
      out << ',' << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", p.noise_fraction);
    out << ',' << buf << '\n';
  }
}

}  // namespace somno

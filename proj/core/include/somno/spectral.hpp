#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "somno/edf.hpp"
#include "somno/error.hpp"

namespace somno {

inline constexpr double kDefaultEpochSeconds = 30.0;

// One scoring window of a signal.
struct Epoch {
  std::size_t index = 0;
  std::vector<double> samples;
  double sampling_rate = 0.0;
  double duration_s = kDefaultEpochSeconds;
};

// Samples per epoch; throws when sampling_rate × duration_s is not an
// integer.
std::size_t samples_per_epoch(double sampling_rate, double duration_s);

// Consecutive non-overlapping windows; a trailing partial window is dropped.
std::vector<Epoch> segment_epochs(const SampleSeries& series,
                                  double duration_s = kDefaultEpochSeconds);

// EEG sleep bands. Delta is closed at both ends, the others are ]lo, hi].
enum class Band : unsigned char { Delta, Theta, Alpha, Sigma, Beta };
inline constexpr std::size_t kNumBands = 5;

struct BandEdges {
  double lo_hz;
  double hi_hz;
};
inline constexpr std::array<BandEdges, kNumBands> kBandEdges = {{
    {0.5, 4.0}, {4.0, 8.0}, {8.0, 12.0}, {12.0, 16.0}, {16.0, 32.0}}};
inline constexpr double kMinRetainedHz = 0.5;
inline constexpr double kMaxRetainedHz = 32.0;

std::string_view band_name(Band b);

// Power spectrum cropped to [0.5, 32] Hz.
struct Spectrum {
  std::vector<double> bin_hz;
  std::vector<double> power;  // squared DFT magnitude, µV²
  double resolution_hz = 0.0;
  std::size_t first_bin = 0;  // DFT index of bin_hz[0]
  double total_power = 0.0;   // Σ |X[k]|² over all N bins, before cropping
};

// Full complex DFT, X[k] = Σ x[n] e^{-2πikn/N}, for all N bins.
std::vector<std::complex<double>> dft(std::span<const double> samples);

// |X[k]|² for all N bins (no cropping); used for energy checks.
std::vector<double> full_power(std::span<const double> samples);

// Rectangular window, no zero padding, then cropped to [0.5, 32] Hz.
Spectrum power_spectrum(std::span<const double> samples, double sampling_rate);
Spectrum power_spectrum(const Epoch& epoch);

// Band each retained bin belongs to; nullopt outside [0.5, 32] Hz.
std::optional<Band> band_of(double frequency_hz, double resolution_hz);

// Relative spectral powers: each band's power over the total.
struct SpectralFeatures {
  std::array<double, kNumBands> rsp{};

  double operator[](Band b) const { return rsp[static_cast<std::size_t>(b)]; }
};

// Raised when the retained spectrum carries no power (at most
// kNegligiblePower × total_power, i.e. zero up to FFT rounding); such an
// epoch has no valid feature vector.
class UnclassifiableEpoch : public Error {
 public:
  using Error::Error;
};

inline constexpr double kNegligiblePower = 1e-20;

std::array<double, kNumBands> band_powers(const Spectrum& spectrum);
SpectralFeatures relative_band_powers(const Spectrum& spectrum);

// nullopt for unclassifiable epochs.
std::optional<SpectralFeatures> epoch_features(const Epoch& epoch);

// A classifier input row: five values per channel in channel order, NaN
// for every value of a channel whose epoch was unclassifiable.
using FeatureRow = std::vector<double>;

// Per-epoch feature rows for one or more channels sharing an epoch grid.
// Epochs are processed in parallel; row order follows epoch index.
std::vector<FeatureRow> extract_features(
    std::span<const SampleSeries> channels,
    double duration_s = kDefaultEpochSeconds);

// Feature file: header `epoch,delta,theta,alpha,sigma,beta` (two-channel
// files append delta_2..beta_2), one row per epoch, %.17g decimals, `nan`
// for unclassifiable epochs.
void write_feature_file(std::ostream& out, std::span<const FeatureRow> rows);
std::vector<FeatureRow> read_feature_file(std::istream& in,
                                          std::string_view source = "features");

}  // namespace somno

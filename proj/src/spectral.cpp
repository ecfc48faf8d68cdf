#include "becsplit/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "becsplit/errors.hpp"
#include "becsplit/fft.hpp"

namespace becsplit::gpe {

namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Shared periodogram scan; returns at most max_peaks peaks, strongest first,
// without enforcing a minimum count.
std::vector<FrequencyPeak> significant_peaks(std::span<const double> series,
                                             double sample_dt, int max_peaks) {
  if (!(sample_dt > 0.0)) throw ConfigError("spectrum: sample_dt must be positive");
  const std::size_t n = series.size();
  if (n < 16) throw NumericalError("spectrum: series too short");

  double mean = 0.0;
  for (double v : series) {
    if (!std::isfinite(v)) throw NumericalError("spectrum: non-finite sample");
    mean += v;
  }
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : series) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  if (var < 1e-24)
    throw NumericalError("spectrum: series is constant, no oscillation to fit");

  // Hann window, then pad 8x for a fine frequency comb.
  const std::size_t m = next_pow2(8 * n);
  std::vector<std::complex<double>> buf(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                             static_cast<double>(n - 1));
    buf[i] = (series[i] - mean) * w;
  }
  Fft1D fft(static_cast<int>(m));
  fft.forward(buf.data());

  const std::size_t half = m / 2;
  std::vector<double> power(half + 1);
  double total = 0.0;
  for (std::size_t i = 0; i <= half; ++i) {
    power[i] = std::norm(buf[i]);
    total += power[i];
  }
  if (!(total > 0.0))
    throw NumericalError("spectrum: empty power spectrum");

  // The Hann main lobe of a padded transform spans ~2 original bins; enforce
  // that separation between reported peaks so one oscillation is not counted
  // twice.
  const std::size_t guard = std::max<std::size_t>(2 * (m / n), 4);
  const double dw = 2.0 * std::numbers::pi / (sample_dt * static_cast<double>(m));

  std::vector<std::size_t> peak_bins;
  for (std::size_t i = 2; i + 1 < half; ++i) {
    if (power[i] > power[i - 1] && power[i] >= power[i + 1]) peak_bins.push_back(i);
  }
  std::sort(peak_bins.begin(), peak_bins.end(),
            [&](std::size_t a, std::size_t b) { return power[a] > power[b]; });

  const double floor = 1e-12 * total;
  std::vector<FrequencyPeak> out;
  std::vector<std::size_t> taken;
  for (std::size_t bin : peak_bins) {
    if (static_cast<int>(out.size()) == max_peaks) break;
    if (power[bin] < floor) break;
    bool clash = false;
    for (std::size_t t : taken)
      if ((bin > t ? bin - t : t - bin) < guard) clash = true;
    if (clash) continue;

    // Quadratic interpolation on log power; the padded grid makes the local
    // parabola an excellent fit.
    const double y1 = std::log(std::max(power[bin - 1], 1e-300));
    const double y2 = std::log(std::max(power[bin], 1e-300));
    const double y3 = std::log(std::max(power[bin + 1], 1e-300));
    const double denom = y1 - 2.0 * y2 + y3;
    double shift = 0.0;
    if (std::abs(denom) > 1e-12) shift = 0.5 * (y1 - y3) / denom;
    shift = std::clamp(shift, -0.5, 0.5);

    out.push_back({(static_cast<double>(bin) + shift) * dw, power[bin]});
    taken.push_back(bin);
  }
  return out;
}

}  // namespace

std::vector<FrequencyPeak> extract_frequencies(std::span<const double> series,
                                               double sample_dt, int n_freq) {
  if (n_freq < 1 || n_freq > 4)
    throw ConfigError("spectrum: n_freq must be between 1 and 4");
  std::vector<FrequencyPeak> out = significant_peaks(series, sample_dt, n_freq);
  if (static_cast<int>(out.size()) < n_freq)
    throw NumericalError("spectrum: found " + std::to_string(out.size()) +
                         " significant peaks, requested " +
                         std::to_string(n_freq));
  return out;
}

std::vector<FrequencyPeak> extract_peaks_up_to(std::span<const double> series,
                                               double sample_dt, int max_peaks) {
  if (max_peaks < 1 || max_peaks > 8)
    throw ConfigError("spectrum: max_peaks must be between 1 and 8");
  return significant_peaks(series, sample_dt, max_peaks);
}

}  // namespace becsplit::gpe

#pragma once

#include <span>
#include <vector>

namespace becsplit::gpe {

struct FrequencyPeak {
  double omega;  // angular frequency, rad per time unit
  double power;  // periodogram peak height (arbitrary scale)
};

// Dominant angular frequencies of a uniformly sampled real series: mean
// removal, Hann window, zero-padded periodogram, then quadratic interpolation
// of each peak on the log power. Peaks are returned strongest first.
// Throws NumericalError when the series is too short, effectively constant,
// or carries fewer significant peaks than requested.
std::vector<FrequencyPeak> extract_frequencies(std::span<const double> series,
                                               double sample_dt, int n_freq);

// Same analysis, but returns however many significant peaks the spectrum
// carries, capped at max_peaks, instead of failing on a shortfall. Callers
// that follow a known oscillation across perturbed runs use the spare
// candidates to survive reorderings of the peak powers.
std::vector<FrequencyPeak> extract_peaks_up_to(std::span<const double> series,
                                               double sample_dt, int max_peaks);

}  // namespace becsplit::gpe

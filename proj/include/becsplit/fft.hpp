#pragma once

#include <complex>

// Forward declarations so fftw3.h stays out of the public headers.
struct fftw_plan_s;

namespace becsplit {

// In-place 1D complex transforms of a fixed size, wrapping FFTW. Plans are
// created with FFTW_ESTIMATE so planning is deterministic and cheap.
// Transforms are unnormalized: forward followed by backward multiplies the
// data by n. Not thread-safe; use one instance per thread.
class Fft1D {
 public:
  explicit Fft1D(int n);
  ~Fft1D();
  Fft1D(const Fft1D&) = delete;
  Fft1D& operator=(const Fft1D&) = delete;

  void forward(std::complex<double>* data) const;
  void backward(std::complex<double>* data) const;
  int size() const { return n_; }

 private:
  int n_;
  fftw_plan_s* fwd_;
  fftw_plan_s* bwd_;
};

}  // namespace becsplit

// fft.hpp — lattice correlations and discrete Hilbert transforms on FFTW
#pragma once

#include <complex>
#include <memory>
#include <vector>

namespace cavitrans {

using cplx = std::complex<double>;

// Contiguous run of lattice points omega_n = n * h, n in [first, first + count).
struct Window {
  long first = 0;
  long count = 0;

  long last() const { return first + count - 1; }
  bool contains(long n) const { return n >= first && n < first + count; }
  long offset(long n) const { return n - first; }
};

// out[n] = sum_m a[n + m] * b[m] for n in the output window, with a and b
// taken as zero outside their windows. Evaluated by zero-padded FFT so the
// linear sum never wraps. The b transform is cached between calls to apply().
// One instance owns one scratch buffer and must not be shared between threads.
class LatticeCorrelator {
 public:
  LatticeCorrelator(Window a, Window b, Window out);
  ~LatticeCorrelator();
  LatticeCorrelator(const LatticeCorrelator&) = delete;
  LatticeCorrelator& operator=(const LatticeCorrelator&) = delete;

  // Strided access lets callers pass one matrix element of a frequency-major array.
  void set_kernel(const cplx* b, long stride = 1);
  void apply(const cplx* a, long a_stride, cplx* out, long out_stride, cplx scale = 1.0);

  // Split form for sums of many correlations: transform each operand, add the
  // products of spectra, and invert once.
  void transform_a(const cplx* a, long a_stride, std::vector<cplx>& spectrum) const;
  void transform_b(const cplx* b, long b_stride, std::vector<cplx>& spectrum) const;
  void inverse(const std::vector<cplx>& spectrum, cplx* out, long out_stride, cplx scale = 1.0) const;

  long fft_size() const { return size_; }
  Window a_window() const { return a_; }
  Window b_window() const { return b_; }
  Window out_window() const { return out_; }

 private:
  struct Plans;
  Window a_, b_, out_;
  long size_ = 0;
  long origin_ = 0;  // lattice index of the first linear-convolution sample
  std::unique_ptr<Plans> plans_;
  std::vector<cplx> kernel_;
};

// Principal-value Hilbert transform H[f](w) = (1/pi) p.v. int f(w') / (w - w') dw'
// of samples on a uniform grid, by the odd-offset quadrature
// H_n = (2/pi) sum_{k odd} f_{n-k} / k. Values outside the window are taken as zero.
class HilbertTransform {
 public:
  explicit HilbertTransform(long count);
  ~HilbertTransform();
  HilbertTransform(const HilbertTransform&) = delete;
  HilbertTransform& operator=(const HilbertTransform&) = delete;

  void apply(const cplx* f, long f_stride, cplx* out, long out_stride);
  long count() const { return count_; }

 private:
  long count_;
  std::unique_ptr<LatticeCorrelator> corr_;
};

// Smallest 2^a 3^b 5^c 7^d not below n.
long fft_friendly_size(long n);

// In-place complex FFT of arbitrary length (sign -1 forward, +1 backward, unnormalized).
void fft_inplace(std::vector<cplx>& data, int sign);

}  // namespace cavitrans

#include "cavitrans/fft.hpp"

#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "cavitrans/errors.hpp"

namespace cavitrans {

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

long fft_friendly_size(long n) {
  long best = 1;
  while (best < n) best *= 2;
  for (long p7 = 1; p7 < best; p7 *= 7)
    for (long p5 = p7; p5 < best; p5 *= 5)
      for (long p3 = p5; p3 < best; p3 *= 3) {
        long v = p3;
        while (v < n) v *= 2;
        if (v < best) best = v;
      }
  return best;
}

struct LatticeCorrelator::Plans {
  long size = 0;
  cplx* buffer = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit Plans(long n) : size(n) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    buffer = reinterpret_cast<cplx*>(fftw_malloc(sizeof(cplx) * n));
    if (!buffer) throw Error(ErrorCode::InvalidArgument, "FFT buffer allocation failed");
    forward = fftw_plan_dft_1d(static_cast<int>(n), as_fftw(buffer), as_fftw(buffer), FFTW_FORWARD, FFTW_ESTIMATE);
    backward = fftw_plan_dft_1d(static_cast<int>(n), as_fftw(buffer), as_fftw(buffer), FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Plans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
    fftw_free(buffer);
  }
};

LatticeCorrelator::LatticeCorrelator(Window a, Window b, Window out) : a_(a), b_(b), out_(out) {
  if (a.count <= 0 || b.count <= 0 || out.count <= 0)
    throw Error(ErrorCode::InvalidArgument, "empty correlation window");
  size_ = fft_friendly_size(a.count + b.count - 1);
  origin_ = a.first - b.last();
  plans_ = std::make_unique<Plans>(size_);
  kernel_.assign(size_, cplx(0.0));
}

LatticeCorrelator::~LatticeCorrelator() = default;

void LatticeCorrelator::transform_b(const cplx* b, long stride, std::vector<cplx>& spectrum) const {
  cplx* buf = plans_->buffer;
  std::memset(static_cast<void*>(buf), 0, sizeof(cplx) * size_);
  for (long i = 0; i < b_.count; ++i) buf[i] = b[(b_.count - 1 - i) * stride];
  fftw_execute(plans_->forward);
  spectrum.assign(buf, buf + size_);
}

void LatticeCorrelator::transform_a(const cplx* a, long stride, std::vector<cplx>& spectrum) const {
  cplx* buf = plans_->buffer;
  std::memset(static_cast<void*>(buf), 0, sizeof(cplx) * size_);
  for (long i = 0; i < a_.count; ++i) buf[i] = a[i * stride];
  fftw_execute(plans_->forward);
  spectrum.assign(buf, buf + size_);
}

void LatticeCorrelator::inverse(const std::vector<cplx>& spectrum, cplx* out, long out_stride, cplx scale) const {
  cplx* buf = plans_->buffer;
  std::copy(spectrum.begin(), spectrum.end(), buf);
  fftw_execute(plans_->backward);
  const cplx s = scale / static_cast<double>(size_);
  const long linear = a_.count + b_.count - 1;
  for (long i = 0; i < out_.count; ++i) {
    const long k = out_.first + i - origin_;
    out[i * out_stride] = (k >= 0 && k < linear) ? s * buf[k] : cplx(0.0);
  }
}

void LatticeCorrelator::set_kernel(const cplx* b, long stride) { transform_b(b, stride, kernel_); }

void LatticeCorrelator::apply(const cplx* a, long a_stride, cplx* out, long out_stride, cplx scale) {
  cplx* buf = plans_->buffer;
  std::memset(static_cast<void*>(buf), 0, sizeof(cplx) * size_);
  for (long i = 0; i < a_.count; ++i) buf[i] = a[i * a_stride];
  fftw_execute(plans_->forward);
  for (long i = 0; i < size_; ++i) buf[i] *= kernel_[i];
  fftw_execute(plans_->backward);
  const cplx s = scale / static_cast<double>(size_);
  const long linear = a_.count + b_.count - 1;
  for (long i = 0; i < out_.count; ++i) {
    const long k = out_.first + i - origin_;
    out[i * out_stride] = (k >= 0 && k < linear) ? s * buf[k] : cplx(0.0);
  }
}

HilbertTransform::HilbertTransform(long count) : count_(count) {
  const Window w{0, count};
  const Window k{-(count - 1), 2 * count - 1};
  corr_ = std::make_unique<LatticeCorrelator>(w, k, w);
  std::vector<cplx> kernel(k.count, cplx(0.0));
  for (long i = 0; i < k.count; ++i) {
    const long m = k.first + i;
    if (m % 2 != 0) kernel[i] = -2.0 / (std::numbers::pi * static_cast<double>(m));
  }
  corr_->set_kernel(kernel.data());
}

HilbertTransform::~HilbertTransform() = default;

void HilbertTransform::apply(const cplx* f, long f_stride, cplx* out, long out_stride) {
  corr_->apply(f, f_stride, out, out_stride);
}

void fft_inplace(std::vector<cplx>& data, int sign) {
  if (data.empty()) return;
  const int n = static_cast<int>(data.size());
  cplx* buf = reinterpret_cast<cplx*>(fftw_malloc(sizeof(cplx) * n));
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_1d(n, as_fftw(buf), as_fftw(buf), sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  std::copy(data.begin(), data.end(), buf);
  fftw_execute(plan);
  std::copy(buf, buf + n, data.begin());
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
}

}  // namespace cavitrans

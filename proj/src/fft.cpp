#include "fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>

namespace mtfcnn::fft {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct Buffer {
  explicit Buffer(std::size_t bytes) : ptr(fftw_malloc(bytes)) {}
  ~Buffer() { fftw_free(ptr); }
  Buffer(const Buffer&) = delete;
  Buffer& operator=(const Buffer&) = delete;
  void* ptr;
};

class Plan {
 public:
  explicit Plan(fftw_plan p) : plan_(p) {}
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

std::vector<std::complex<double>> complex_transform(
    const std::vector<std::complex<double>>& x, int sign) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  Buffer in(sizeof(fftw_complex) * n), out(sizeof(fftw_complex) * n);
  auto* pin = static_cast<fftw_complex*>(in.ptr);
  auto* pout = static_cast<fftw_complex*>(out.ptr);
  fftw_plan raw;
  {
    std::lock_guard lock(planner_mutex());
    raw = fftw_plan_dft_1d(static_cast<int>(n), pin, pout, sign, FFTW_ESTIMATE);
  }
  Plan plan(raw);
  std::memcpy(pin, x.data(), sizeof(fftw_complex) * n);
  plan.execute();
  std::vector<std::complex<double>> y(n);
  std::memcpy(static_cast<void*>(y.data()), pout, sizeof(fftw_complex) * n);
  return y;
}

}  // namespace

std::vector<std::complex<double>> forward_real(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  const std::size_t nb = n / 2 + 1;
  Buffer in(sizeof(double) * n), out(sizeof(fftw_complex) * nb);
  auto* pin = static_cast<double*>(in.ptr);
  auto* pout = static_cast<fftw_complex*>(out.ptr);
  fftw_plan raw;
  {
    std::lock_guard lock(planner_mutex());
    raw = fftw_plan_dft_r2c_1d(static_cast<int>(n), pin, pout, FFTW_ESTIMATE);
  }
  Plan plan(raw);
  std::memcpy(pin, x.data(), sizeof(double) * n);
  plan.execute();
  std::vector<std::complex<double>> y(nb);
  std::memcpy(static_cast<void*>(y.data()), pout, sizeof(fftw_complex) * nb);
  return y;
}

std::vector<double> inverse_real(const std::vector<std::complex<double>>& bins,
                                 std::size_t n) {
  if (n == 0) return {};
  const std::size_t nb = n / 2 + 1;
  Buffer in(sizeof(fftw_complex) * nb), out(sizeof(double) * n);
  auto* pin = static_cast<fftw_complex*>(in.ptr);
  auto* pout = static_cast<double*>(out.ptr);
  fftw_plan raw;
  {
    std::lock_guard lock(planner_mutex());
    // c2r destroys its input; the copy below makes that harmless.
    raw = fftw_plan_dft_c2r_1d(static_cast<int>(n), pin, pout, FFTW_ESTIMATE);
  }
  Plan plan(raw);
  std::memset(pin, 0, sizeof(fftw_complex) * nb);
  std::memcpy(pin, bins.data(),
              sizeof(fftw_complex) * std::min(nb, bins.size()));
  plan.execute();
  std::vector<double> y(pout, pout + n);
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : y) v *= scale;
  return y;
}

std::vector<std::complex<double>> forward(
    const std::vector<std::complex<double>>& x) {
  return complex_transform(x, FFTW_FORWARD);
}

std::vector<std::complex<double>> inverse(
    const std::vector<std::complex<double>>& x) {
  return complex_transform(x, FFTW_BACKWARD);
}

std::size_t good_size(std::size_t n) {
  if (n <= 1) return 1;
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u, 7u}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

}  // namespace mtfcnn::fft

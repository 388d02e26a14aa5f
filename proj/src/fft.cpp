#include "isac/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace isac {

namespace {

// FFTW's planner is not thread-safe; fftw_execute_dft is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

UnitaryFft::UnitaryFft(int size) : size_(size) {
  if (size < 1) throw std::invalid_argument("UnitaryFft: size must be >= 1");
  std::vector<Complex> a(size), b(size);
  std::lock_guard<std::mutex> lock(planner_mutex());
  plan_fwd_ = fftw_plan_dft_1d(size, reinterpret_cast<fftw_complex*>(a.data()),
                               reinterpret_cast<fftw_complex*>(b.data()),
                               FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  plan_bwd_ = fftw_plan_dft_1d(size, reinterpret_cast<fftw_complex*>(a.data()),
                               reinterpret_cast<fftw_complex*>(b.data()),
                               FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plan_fwd_ || !plan_bwd_) throw std::runtime_error("fftw planning failed");
}

UnitaryFft::~UnitaryFft() {
  if (plan_fwd_ || plan_bwd_) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
  }
}

UnitaryFft::UnitaryFft(UnitaryFft&& other) noexcept
    : size_(other.size_), plan_fwd_(other.plan_fwd_), plan_bwd_(other.plan_bwd_) {
  other.plan_fwd_ = nullptr;
  other.plan_bwd_ = nullptr;
}

UnitaryFft& UnitaryFft::operator=(UnitaryFft&& other) noexcept {
  if (this != &other) {
    this->~UnitaryFft();
    size_ = other.size_;
    plan_fwd_ = other.plan_fwd_;
    plan_bwd_ = other.plan_bwd_;
    other.plan_fwd_ = nullptr;
    other.plan_bwd_ = nullptr;
  }
  return *this;
}

void UnitaryFft::forward_raw(const Complex* in, Complex* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(plan_fwd_),
                   reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

void UnitaryFft::backward_raw(const Complex* in, Complex* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(plan_bwd_),
                   reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

void UnitaryFft::forward(const Complex* in, Complex* out) const {
  forward_raw(in, out);
  const double s = 1.0 / std::sqrt(static_cast<double>(size_));
  for (int i = 0; i < size_; ++i) out[i] *= s;
}

void UnitaryFft::inverse(const Complex* in, Complex* out) const {
  backward_raw(in, out);
  const double s = 1.0 / std::sqrt(static_cast<double>(size_));
  for (int i = 0; i < size_; ++i) out[i] *= s;
}

Eigen::VectorXcd UnitaryFft::forward(const Eigen::VectorXcd& v) const {
  Eigen::VectorXcd out(size_);
  forward(v.data(), out.data());
  return out;
}

Eigen::VectorXcd UnitaryFft::inverse(const Eigen::VectorXcd& v) const {
  Eigen::VectorXcd out(size_);
  inverse(v.data(), out.data());
  return out;
}

const UnitaryFft& shared_fft(int size) {
  static std::mutex cache_mutex;
  static std::map<int, std::unique_ptr<UnitaryFft>>* cache =
      new std::map<int, std::unique_ptr<UnitaryFft>>();
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache->find(size);
  if (it == cache->end()) {
    it = cache->emplace(size, std::make_unique<UnitaryFft>(size)).first;
  }
  return *it->second;
}

}  // namespace isac

#pragma once

#include <Eigen/Core>

#include "isac/types.hpp"

namespace isac {

// Unitary-DFT wrapper around FFTW. forward() applies
// [F]_{l,n} = exp(-j 2 pi n l / N) / sqrt(N); inverse() applies F^H.
// The *_raw variants skip the 1/sqrt(N) factor. Plans use FFTW_ESTIMATE so
// results are reproducible run to run; execution is thread-safe, planning
// is serialized internally.
class UnitaryFft {
 public:
  explicit UnitaryFft(int size);
  ~UnitaryFft();

  UnitaryFft(const UnitaryFft&) = delete;
  UnitaryFft& operator=(const UnitaryFft&) = delete;
  UnitaryFft(UnitaryFft&& other) noexcept;
  UnitaryFft& operator=(UnitaryFft&& other) noexcept;

  int size() const { return size_; }

  // in and out must not alias and must each hold size() entries.
  void forward(const Complex* in, Complex* out) const;
  void inverse(const Complex* in, Complex* out) const;
  void forward_raw(const Complex* in, Complex* out) const;
  void backward_raw(const Complex* in, Complex* out) const;

  Eigen::VectorXcd forward(const Eigen::VectorXcd& v) const;
  Eigen::VectorXcd inverse(const Eigen::VectorXcd& v) const;

 private:
  int size_ = 0;
  void* plan_fwd_ = nullptr;  // fftw_plan
  void* plan_bwd_ = nullptr;
};

// Process-wide plan cache; returned references stay valid for the process
// lifetime.
const UnitaryFft& shared_fft(int size);

}  // namespace isac

#pragma once

#include <complex>
#include <vector>

#include "rfm/matrix.hpp"

namespace rfm {

inline constexpr std::size_t kMaxEigenDim = 64;
inline constexpr int kMaxQrIterations = 10000;

struct SpectrumReport {
  std::vector<std::complex<double>> eigenvalues;
  double max_abs_real_part = 0.0;
  bool any_nonzero_imag = false;
};

/// Orthogonal similarity reduction to upper Hessenberg form (Householder).
Matrix hessenberg(const Matrix& a);

/// All eigenvalues of a real square matrix via Hessenberg reduction and
/// Francis double-shift QR. Complex eigenvalues come out as exact conjugate
/// pairs. Throws ConvergenceFailure after kMaxQrIterations sweeps.
SpectrumReport eigen_spectrum(const Matrix& a);

}  // namespace rfm

#pragma once

#include <complex>
#include <vector>

namespace gselab::fft {

/// In-place radix-2 DFT, A_j = sum_i a_i exp(-2*pi*i*j*k/n). Length must be a
/// power of two. Twiddle tables are cached per thread.
void forward(std::vector<std::complex<double>>& a);

/// In-place inverse DFT including the 1/n factor.
void inverse(std::vector<std::complex<double>>& a);

bool is_pow2(std::size_t n);

}  // namespace gselab::fft

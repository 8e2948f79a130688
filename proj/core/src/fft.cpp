#include "gselab/fft.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace gselab::fft {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace {

// Roots of unity for each stage, one table per transform size and direction.
const std::vector<std::complex<double>>& twiddles(std::size_t n, bool inverse_dir) {
    thread_local std::map<std::pair<std::size_t, bool>, std::vector<std::complex<double>>> cache;
    auto key = std::make_pair(n, inverse_dir);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<std::complex<double>> tw(n / 2);
    const double sign = inverse_dir ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n / 2; ++i) {
        const double ang = sign * 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
        tw[i] = {std::cos(ang), std::sin(ang)};
    }
    return cache.emplace(key, std::move(tw)).first->second;
}

void transform(std::vector<std::complex<double>>& a, bool inverse_dir) {
    const std::size_t n = a.size();
    if (!is_pow2(n)) throw std::invalid_argument("fft: length must be a power of two");
    if (n < 2) return;

    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    const auto& tw = twiddles(n, inverse_dir);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> w = tw[k * stride];
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
}

}  // namespace

void forward(std::vector<std::complex<double>>& a) { transform(a, false); }

void inverse(std::vector<std::complex<double>>& a) {
    transform(a, true);
    const double inv_n = 1.0 / static_cast<double>(a.size());
    for (auto& v : a) v *= inv_n;
}

}  // namespace gselab::fft

#include <bit>
#include <cmath>
#include <numbers>

#include "vigil/dsp.hpp"
#include "vigil/error.hpp"

namespace vigil::dsp {

namespace {

using cplx = std::complex<double>;

// In-place iterative radix-2 transform; n must be a power of two.
// sign = -1 forward, +1 inverse (unscaled).
void radix2(std::vector<cplx>& a, int sign) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  // Twiddles for the largest stage; smaller stages stride through it.
  std::vector<cplx> tw(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    tw[k] = {std::cos(angle), sign * std::sin(angle)};
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const cplx u = a[i + k];
        const cplx v = a[i + k + half] * tw[k * stride];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

std::vector<cplx> bluestein(std::span<const cplx> x) {
  const std::size_t n = x.size();
  const std::size_t m = std::bit_ceil(2 * n - 1);
  // chirp_k = exp(-i pi k^2 / n); k^2 reduced mod 2n keeps the angle small.
  std::vector<cplx> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto k2 = static_cast<std::size_t>((static_cast<unsigned __int128>(k) * k) % (2 * n));
    const double angle = std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
    chirp[k] = {std::cos(angle), -std::sin(angle)};
  }
  std::vector<cplx> a(m), b(m);
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);
  radix2(a, -1);
  radix2(b, -1);
  for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
  radix2(a, +1);
  const double scale = 1.0 / static_cast<double>(m);
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * scale * chirp[k];
  return out;
}

}  // namespace

std::vector<cplx> fft(std::span<const cplx> x) {
  if (x.empty()) return {};
  if (std::has_single_bit(x.size())) {
    std::vector<cplx> a(x.begin(), x.end());
    radix2(a, -1);
    return a;
  }
  return bluestein(x);
}

Spectrum fft_real(std::span<const double> samples, double sample_rate) {
  if (samples.size() < 2) throw Error(Errc::TooShort, "transform needs at least 2 samples");
  const std::size_t n = samples.size();
  std::vector<cplx> x(samples.begin(), samples.end());
  auto full = fft(x);
  full.resize(n / 2 + 1);
  return Spectrum{std::move(full), sample_rate / static_cast<double>(n), n};
}

double spectrum_energy(const Spectrum& s) {
  const std::size_t n = s.n;
  double sum = std::norm(s.bins[0]);
  const std::size_t last_interior = (n % 2 == 0) ? n / 2 - 1 : n / 2;
  for (std::size_t k = 1; k <= last_interior; ++k) sum += 2.0 * std::norm(s.bins[k]);
  if (n % 2 == 0) sum += std::norm(s.bins[n / 2]);
  return sum / static_cast<double>(n);
}

}  // namespace vigil::dsp

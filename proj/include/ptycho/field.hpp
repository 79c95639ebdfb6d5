#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

namespace ptycho {

using cdouble = std::complex<double>;

// Dense row-major 2D complex array; the carrier for objects, probes, exit
// waves and spectra. Double precision throughout.
struct ComplexField {
  int height = 0;
  int width = 0;
  std::vector<cdouble> values;

  ComplexField() = default;
  ComplexField(int h, int w, cdouble fill = cdouble{0.0, 0.0})
      : height(h), width(w) {
    if (h <= 0 || w <= 0) throw std::invalid_argument("ComplexField: dimensions must be positive");
    values.assign(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill);
  }

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }

  cdouble& at(int r, int c) { return values[static_cast<std::size_t>(r) * width + c]; }
  const cdouble& at(int r, int c) const { return values[static_cast<std::size_t>(r) * width + c]; }

  bool same_shape(const ComplexField& o) const { return height == o.height && width == o.width; }
};

inline double energy(const ComplexField& f) {
  double s = 0.0;
  for (const auto& v : f.values) s += std::norm(v);
  return s;
}

inline double norm2(const ComplexField& f) { return std::sqrt(energy(f)); }

inline bool all_finite(const ComplexField& f) {
  for (const auto& v : f.values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

// a*proj + (1-a)*input, elementwise; a=0 identity, a=1 full step, a=2 reflection
inline ComplexField relax_field(const ComplexField& input, const ComplexField& proj, double a) {
  if (!input.same_shape(proj)) throw std::invalid_argument("relax_field: shape mismatch");
  ComplexField out(input.height, input.width);
  const double ia = 1.0 - a;
  for (std::size_t i = 0; i < input.size(); ++i) out.values[i] = a * proj.values[i] + ia * input.values[i];
  return out;
}

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// twiddle table w[k] = exp(sign * 2*pi*i * k / n), k < n/2
inline std::vector<cdouble> twiddles(std::size_t n, int sign) {
  std::vector<cdouble> w(n / 2);
  const double step = sign * 2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t k = 0; k < n / 2; ++k) w[k] = std::polar(1.0, step * static_cast<double>(k));
  return w;
}

// iterative radix-2 in-place transform, n a power of two, unnormalized
inline void fft_pow2(cdouble* a, std::size_t n, const std::vector<cdouble>& wtab) {
  if (n <= 1) return;
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    const std::size_t half = len / 2;
    for (std::size_t blk = 0; blk < n; blk += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const cdouble w = wtab[k * stride];
        cdouble& lo = a[blk + k];
        cdouble& hi = a[blk + k + half];
        const cdouble t = w * hi;
        hi = lo - t;
        lo += t;
      }
    }
  }
}

// Bluestein chirp-z: DFT of arbitrary length as a power-of-two convolution.
// The chirp angle uses j^2 mod 2n so large indices never hit sin/cos range loss.
struct BluesteinPlan {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<cdouble> chirp;
  std::vector<cdouble> kernel_hat;
  std::vector<cdouble> fwd_tw;
  std::vector<cdouble> inv_tw;

  BluesteinPlan(std::size_t n_, int sign) : n(n_) {
    m = std::bit_ceil(2 * n - 1);
    chirp.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t q = (j * j) % (2 * n);
      chirp[j] = std::polar(1.0, sign * std::numbers::pi * static_cast<double>(q) / static_cast<double>(n));
    }
    fwd_tw = twiddles(m, -1);
    inv_tw = twiddles(m, +1);
    std::vector<cdouble> b(m, cdouble{0.0, 0.0});
    b[0] = std::conj(chirp[0]);
    for (std::size_t j = 1; j < n; ++j) b[j] = b[m - j] = std::conj(chirp[j]);
    fft_pow2(b.data(), m, fwd_tw);
    kernel_hat = std::move(b);
  }

  void run(cdouble* x) const {
    std::vector<cdouble> a(m, cdouble{0.0, 0.0});
    for (std::size_t j = 0; j < n; ++j) a[j] = x[j] * chirp[j];
    fft_pow2(a.data(), m, fwd_tw);
    for (std::size_t j = 0; j < m; ++j) a[j] *= kernel_hat[j];
    fft_pow2(a.data(), m, inv_tw);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) x[k] = chirp[k] * (a[k] * inv_m);
  }
};

// one 1D transform length, radix-2 when possible, Bluestein otherwise
struct LinePlan {
  std::size_t n;
  std::vector<cdouble> tw;
  std::optional<BluesteinPlan> blu;

  LinePlan(std::size_t n_, int sign) : n(n_) {
    if (is_pow2(n)) {
      tw = twiddles(n, sign);
    } else {
      blu.emplace(n, sign);
    }
  }

  void run(cdouble* data) const {
    if (blu) {
      blu->run(data);
    } else {
      fft_pow2(data, n, tw);
    }
  }
};

// unnormalized separable 2D transform, rows then columns
inline void transform2d(ComplexField& f, int sign) {
  const std::size_t h = static_cast<std::size_t>(f.height);
  const std::size_t w = static_cast<std::size_t>(f.width);
  const LinePlan row_plan(w, sign);
  for (std::size_t r = 0; r < h; ++r) row_plan.run(f.values.data() + r * w);
  const LinePlan col_plan(h, sign);
  std::vector<cdouble> col(h);
  for (std::size_t c = 0; c < w; ++c) {
    for (std::size_t r = 0; r < h; ++r) col[r] = f.values[r * w + c];
    col_plan.run(col.data());
    for (std::size_t r = 0; r < h; ++r) f.values[r * w + c] = col[r];
  }
}

// out[(r+dr) mod h][(c+dc) mod w] = in[r][c]
inline ComplexField circular_shift(const ComplexField& f, int dr, int dc) {
  ComplexField out(f.height, f.width);
  const int h = f.height, w = f.width;
  for (int r = 0; r < h; ++r) {
    const int rr = (r + dr) % h;
    for (int c = 0; c < w; ++c) out.values[static_cast<std::size_t>(rr) * w + (c + dc) % w] = f.at(r, c);
  }
  return out;
}

inline ComplexField fftshift(const ComplexField& f) { return circular_shift(f, f.height / 2, f.width / 2); }
inline ComplexField ifftshift(const ComplexField& f) {
  return circular_shift(f, f.height - f.height / 2, f.width - f.width / 2);
}

}  // namespace detail

// Centered unitary 2D DFT: index shift before and after the transform so a
// centered feature maps to a centered spectrum, scaled by 1/sqrt(H*W) so
// Parseval holds exactly and either domain can carry a magnitude constraint.
inline ComplexField dft2_centered(const ComplexField& f) {
  if (f.empty()) throw std::invalid_argument("dft2_centered: empty field");
  ComplexField g = detail::ifftshift(f);
  detail::transform2d(g, -1);
  g = detail::fftshift(g);
  const double s = 1.0 / std::sqrt(static_cast<double>(f.height) * static_cast<double>(f.width));
  for (auto& v : g.values) v *= s;
  return g;
}

// exact inverse of dft2_centered (same normalization and centering)
inline ComplexField idft2_centered(const ComplexField& f) {
  if (f.empty()) throw std::invalid_argument("idft2_centered: empty field");
  ComplexField g = detail::ifftshift(f);
  detail::transform2d(g, +1);
  g = detail::fftshift(g);
  const double s = 1.0 / std::sqrt(static_cast<double>(f.height) * static_cast<double>(f.width));
  for (auto& v : g.values) v *= s;
  return g;
}

}  // namespace ptycho

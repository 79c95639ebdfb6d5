#pragma once

#include <cmath>
#include <stdexcept>

#include "ptycho/projections.hpp"

// Data-fidelity error of a wave set and ground-truth object error with the
// global complex-scale ambiguity removed.
namespace ptycho {

struct MetricRegion {
  int top = 0;
  int left = 0;
  int height = 0;
  int width = 0;

  void validate(int n) const {
    if (height < 1 || width < 1 || top < 0 || left < 0 || top + height > n || left + width > n)
      throw std::invalid_argument("MetricRegion: rectangle out of object bounds");
  }
};

// centered rectangle covering `frac` of each object dimension
inline MetricRegion central_region(int n, double frac = 0.5) {
  int h = static_cast<int>(std::round(n * frac));
  h = std::clamp(h, 1, n);
  const int top = (n - h) / 2;
  return {top, top, h, h};
}

// Normalized amplitude residual sqrt( sum (|F psi| - sqrt(I))^2 / sum I ).
// Zero iff every spectral magnitude matches the data exactly.
inline double data_error(const ExitWaveSet& x, const DiffractionStack& data) {
  if (static_cast<int>(x.count()) != data.count)
    throw std::invalid_argument("data_error: wave count does not match pattern count");
  double num = 0.0;
  double den = 0.0;
  for (int j = 0; j < data.count; ++j) {
    const ComplexField spectrum = dft2_centered(x.waves[static_cast<std::size_t>(j)]);
    if (spectrum.height != data.size || spectrum.width != data.size)
      throw std::invalid_argument("data_error: wave dimensions do not match patterns");
    const double* intensity = data.pattern(j);
    for (std::size_t q = 0; q < spectrum.size(); ++q) {
      const double diff = std::abs(spectrum.values[q]) - std::sqrt(intensity[q]);
      num += diff * diff;
      den += intensity[q];
    }
  }
  if (den <= 0.0) throw std::invalid_argument("data_error: all-zero data");
  return std::sqrt(num / den);
}

struct Alignment {
  cdouble gamma;
  ComplexField aligned;
};

// Least-squares complex scale: gamma = <rec, truth> / ||rec||^2 over the
// region minimizes ||gamma*rec - truth||^2, removing the global scale and
// phase freedom of a blind reconstruction.
inline Alignment align_complex(const ComplexField& rec, const ComplexField& truth,
                               const MetricRegion& region) {
  if (!rec.same_shape(truth)) throw std::invalid_argument("align_complex: shape mismatch");
  region.validate(rec.height);
  cdouble cross{0.0, 0.0};
  double power = 0.0;
  for (int r = region.top; r < region.top + region.height; ++r) {
    for (int c = region.left; c < region.left + region.width; ++c) {
      cross += std::conj(rec.at(r, c)) * truth.at(r, c);
      power += std::norm(rec.at(r, c));
    }
  }
  if (power == 0.0) throw std::invalid_argument("align_complex: reconstruction is zero on region");
  const cdouble gamma = cross / power;
  ComplexField aligned(rec.height, rec.width);
  for (std::size_t i = 0; i < rec.size(); ++i) aligned.values[i] = gamma * rec.values[i];
  return {gamma, std::move(aligned)};
}

// ||aligned - truth|| / ||truth|| over the region, after scale alignment
inline double object_nrmse(const ComplexField& rec, const ComplexField& truth,
                           const MetricRegion& region) {
  const Alignment a = align_complex(rec, truth, region);
  double num = 0.0;
  double den = 0.0;
  for (int r = region.top; r < region.top + region.height; ++r) {
    for (int c = region.left; c < region.left + region.width; ++c) {
      num += std::norm(a.aligned.at(r, c) - truth.at(r, c));
      den += std::norm(truth.at(r, c));
    }
  }
  if (den == 0.0) throw std::invalid_argument("object_nrmse: truth is zero on region");
  return std::sqrt(num / den);
}

}  // namespace ptycho

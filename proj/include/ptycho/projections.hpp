#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "ptycho/field.hpp"
#include "ptycho/simulate.hpp"

// The two product-space projections for blind ptychography: the Fourier
// magnitude (divide) projection applied per pattern, and the probe*object
// consistency (concur) projection approximated by alternating least squares.
namespace ptycho {

// The product-space iterate: one exit wave per scan position.
struct ExitWaveSet {
  std::vector<ComplexField> waves;

  std::size_t count() const { return waves.size(); }
};

struct ProbeObjectPair {
  ComplexField probe;   // M x M
  ComplexField object;  // N x N
};

inline ExitWaveSet relax_waves(const ExitWaveSet& input, const ExitWaveSet& proj, double a) {
  if (input.count() != proj.count()) throw std::invalid_argument("relax_waves: count mismatch");
  ExitWaveSet out;
  out.waves.reserve(input.count());
  for (std::size_t j = 0; j < input.count(); ++j)
    out.waves.push_back(relax_field(input.waves[j], proj.waves[j], a));
  return out;
}

// Nearest field whose spectrum magnitudes equal `amplitude`: keep each
// spectral phase, replace the magnitude. Pixels whose spectral magnitude falls
// below eps_frac * max|spectrum| have no well-defined phase and take phase 0.
inline ComplexField project_modulus(const ComplexField& psi, std::span<const double> amplitude,
                                    double eps_frac = 1e-12) {
  if (amplitude.size() != psi.size())
    throw std::invalid_argument("project_modulus: amplitude size mismatch");
  for (double a : amplitude)
    if (!(a >= 0.0)) throw std::invalid_argument("project_modulus: negative amplitude");

  ComplexField spectrum = dft2_centered(psi);
  double peak = 0.0;
  for (const auto& v : spectrum.values) peak = std::max(peak, std::abs(v));
  const double eps = eps_frac * peak;
  for (std::size_t q = 0; q < spectrum.size(); ++q) {
    const double mag = std::abs(spectrum.values[q]);
    if (mag > eps) {
      spectrum.values[q] *= amplitude[q] / mag;
    } else {
      spectrum.values[q] = cdouble{amplitude[q], 0.0};
    }
  }
  return idft2_centered(spectrum);
}

// componentwise relaxed magnitude projection: psi_j <- c*P(psi_j) + (1-c)*psi_j
// with per-pattern amplitudes sqrt(I_j)
inline ExitWaveSet divide_project(const ExitWaveSet& x, const DiffractionStack& data, double c,
                                  double eps_frac = 1e-12) {
  if (static_cast<int>(x.count()) != data.count)
    throw std::invalid_argument("divide_project: wave count does not match pattern count");
  ExitWaveSet out;
  out.waves.reserve(x.count());
  std::vector<double> amplitude(static_cast<std::size_t>(data.size) * data.size);
  for (int j = 0; j < data.count; ++j) {
    const ComplexField& psi = x.waves[static_cast<std::size_t>(j)];
    if (psi.height != data.size || psi.width != data.size)
      throw std::invalid_argument("divide_project: wave dimensions do not match patterns");
    const double* intensity = data.pattern(j);
    for (std::size_t q = 0; q < amplitude.size(); ++q) amplitude[q] = std::sqrt(intensity[q]);
    out.waves.push_back(relax_field(psi, project_modulus(psi, amplitude, eps_frac), c));
  }
  return out;
}

// Least-squares object given the probe: at each object pixel, the sum of
// conj(P)*psi over covering windows divided by the summed probe power plus
// delta = reg_frac * max(summed probe power). Unlit pixels stay at zero.
inline ComplexField update_object(const ExitWaveSet& x, const ComplexField& probe,
                                  const ScanGeometry& geom, double reg_frac = 1e-9) {
  const int m = geom.probe_size;
  const int n = geom.object_size;
  if (probe.height != m || probe.width != m)
    throw std::invalid_argument("update_object: probe dimensions do not match geometry");
  if (x.count() != geom.count())
    throw std::invalid_argument("update_object: wave count does not match geometry");

  ComplexField num(n, n);
  std::vector<double> den(static_cast<std::size_t>(n) * n, 0.0);
  for (std::size_t j = 0; j < geom.count(); ++j) {
    const ComplexField& psi = x.waves[j];
    if (psi.height != m || psi.width != m)
      throw std::invalid_argument("update_object: wave dimensions do not match geometry");
    const auto [pr, pc] = geom.positions[j];
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) {
        const std::size_t idx = static_cast<std::size_t>(pr + r) * n + (pc + c);
        num.values[idx] += std::conj(probe.at(r, c)) * psi.at(r, c);
        den[idx] += std::norm(probe.at(r, c));
      }
    }
  }
  double peak = 0.0;
  for (double d : den) peak = std::max(peak, d);
  const double delta = reg_frac * peak;
  ComplexField out(n, n);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = den[i] + delta;
    out.values[i] = d > 0.0 ? num.values[i] / d : cdouble{0.0, 0.0};
  }
  return out;
}

// symmetric least-squares probe given the object
inline ComplexField update_probe(const ExitWaveSet& x, const ComplexField& object,
                                 const ScanGeometry& geom, double reg_frac = 1e-9) {
  const int m = geom.probe_size;
  if (object.height != geom.object_size || object.width != geom.object_size)
    throw std::invalid_argument("update_probe: object dimensions do not match geometry");
  if (x.count() != geom.count())
    throw std::invalid_argument("update_probe: wave count does not match geometry");

  ComplexField num(m, m);
  std::vector<double> den(static_cast<std::size_t>(m) * m, 0.0);
  for (std::size_t j = 0; j < geom.count(); ++j) {
    const ComplexField& psi = x.waves[j];
    if (psi.height != m || psi.width != m)
      throw std::invalid_argument("update_probe: wave dimensions do not match geometry");
    const auto [pr, pc] = geom.positions[j];
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) {
        const std::size_t idx = static_cast<std::size_t>(r) * m + c;
        const cdouble o = object.at(pr + r, pc + c);
        num.values[idx] += std::conj(o) * psi.at(r, c);
        den[idx] += std::norm(o);
      }
    }
  }
  double peak = 0.0;
  for (double d : den) peak = std::max(peak, d);
  const double delta = reg_frac * peak;
  ComplexField out(m, m);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = den[i] + delta;
    out.values[i] = d > 0.0 ? num.values[i] / d : cdouble{0.0, 0.0};
  }
  return out;
}

struct ConcurResult {
  ExitWaveSet waves;
  ProbeObjectPair pair;
};

inline double consistency_residual(const ExitWaveSet& x, const ProbeObjectPair& pair,
                                   const ScanGeometry& geom) {
  // compensated summation keeps the monotonicity checks out of rounding noise
  double sum = 0.0, comp = 0.0;
  for (std::size_t j = 0; j < geom.count(); ++j) {
    const ComplexField model = exit_wave(pair.probe, pair.object, geom.positions[j]);
    for (std::size_t q = 0; q < model.size(); ++q) {
      const double term = std::norm(x.waves[j].values[q] - model.values[q]);
      const double y = term - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
  }
  return sum;
}

// Projection of the wave set toward the blind consistency set
// { psi_j = P * O[window_j] }. The exact projection onto this nonconvex set is
// intractable; `inner_iters` rounds of alternating least squares from the
// warm-started seed pair stand in for it. With renorm on, the probe is rescaled
// to unit energy and the object inversely, pinning the free P*O scale. Returns
// the b-relaxed synthesized waves and the refined pair.
inline ConcurResult concur_project(const ExitWaveSet& x, const ScanGeometry& geom,
                                   const ProbeObjectPair& seed_pair, double b, int inner_iters,
                                   double reg_frac = 1e-9, bool renorm = true) {
  if (inner_iters < 1) throw std::invalid_argument("concur_project: inner_iters must be >= 1");
  ProbeObjectPair pair = seed_pair;
  for (int it = 0; it < inner_iters; ++it) {
    pair.object = update_object(x, pair.probe, geom, reg_frac);
    pair.probe = update_probe(x, pair.object, geom, reg_frac);
  }
  if (renorm) {
    const double e = energy(pair.probe);
    if (e > 0.0) {
      const double s = std::sqrt(e);
      for (auto& v : pair.probe.values) v /= s;
      for (auto& v : pair.object.values) v *= s;
    }
  }
  ExitWaveSet synthesized;
  synthesized.waves.reserve(geom.count());
  for (std::size_t j = 0; j < geom.count(); ++j)
    synthesized.waves.push_back(exit_wave(pair.probe, pair.object, geom.positions[j]));
  return {relax_waves(x, synthesized, b), std::move(pair)};
}

}  // namespace ptycho

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptycho/field.hpp"
#include "ptycho/rng.hpp"

// Synthetic ground truth and far-field forward model: procedural phantom
// object, aperture probes, jittered raster scans and the diffraction stack.
namespace ptycho {

struct ScanGeometry {
  std::vector<std::array<int, 2>> positions;  // (row, col) of each probe window's top-left corner
  int probe_size = 0;                         // M, square window
  int object_size = 0;                        // N, square object

  std::size_t count() const { return positions.size(); }

  void validate() const {
    if (probe_size <= 0 || object_size <= 0 || probe_size > object_size)
      throw std::invalid_argument("ScanGeometry: invalid sizes");
    if (positions.empty()) throw std::invalid_argument("ScanGeometry: no scan positions");
    for (const auto& p : positions) {
      if (p[0] < 0 || p[1] < 0 || p[0] + probe_size > object_size || p[1] + probe_size > object_size)
        throw std::invalid_argument("ScanGeometry: probe window out of object bounds");
    }
  }
};

// Per-position measured intensities, J patterns of M x M each.
struct DiffractionStack {
  int count = 0;
  int size = 0;
  std::vector<double> intensities;  // position-major, row-major within a pattern

  double& at(int j, int r, int c) {
    return intensities[(static_cast<std::size_t>(j) * size + r) * size + c];
  }
  const double& at(int j, int r, int c) const {
    return intensities[(static_cast<std::size_t>(j) * size + r) * size + c];
  }
  const double* pattern(int j) const {
    return intensities.data() + static_cast<std::size_t>(j) * size * size;
  }
};

struct GroundTruth {
  ComplexField object;
  ComplexField probe;
};

// Procedural transmission phantom: unit background carrying `cell_count`
// soft-edged annular disks. Each disk scales amplitude down by up to
// `amplitude_contrast` and adds a per-cell phase drawn uniformly from
// [-phase_range, phase_range]; overlaps resolve to the strongest cell so the
// stated amplitude/phase bounds hold everywhere.
inline ComplexField make_phantom(int n, double amplitude_contrast, double phase_range,
                                 int cell_count, std::uint64_t seed) {
  if (n < 32) throw std::invalid_argument("make_phantom: n must be >= 32");
  if (cell_count < 1) throw std::invalid_argument("make_phantom: cell_count must be >= 1");
  if (amplitude_contrast < 0.0 || amplitude_contrast > 1.0)
    throw std::invalid_argument("make_phantom: amplitude_contrast must lie in [0,1]");
  if (phase_range < 0.0) throw std::invalid_argument("make_phantom: phase_range must be >= 0");

  struct Cell {
    double cx, cy, radius, phase;
  };
  Rng rng(seed);
  std::vector<Cell> cells(static_cast<std::size_t>(cell_count));
  for (auto& cell : cells) {
    cell.radius = rng.uniform_range(n / 24.0, n / 12.0);
    cell.cx = rng.uniform_range(cell.radius, n - 1.0 - cell.radius);
    cell.cy = rng.uniform_range(cell.radius, n - 1.0 - cell.radius);
    cell.phase = rng.uniform_range(-phase_range, phase_range);
  }

  ComplexField out(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      double best_t = 0.0;
      double best_phase = 0.0;
      for (const auto& cell : cells) {
        const double d = std::hypot(r - cell.cx, c - cell.cy);
        const double w = 0.25 * cell.radius;
        const double outer = std::clamp((cell.radius - d) / w, 0.0, 1.0);
        if (outer <= 0.0) continue;
        const double inner = std::clamp((0.45 * cell.radius - d) / w, 0.0, 1.0);
        const double t = outer * (1.0 - 0.5 * inner);  // full-depth ring, shallower core
        if (t > best_t) {
          best_t = t;
          best_phase = cell.phase;
        }
      }
      const double amp = 1.0 - amplitude_contrast * best_t;
      out.at(r, c) = std::polar(amp, best_phase * best_t);
    }
  }
  return out;
}

// Centered circular aperture of the given radius, edges rolled off linearly
// over `edge_smooth` pixels, normalized to unit total energy.
inline ComplexField make_probe(int m, double radius, double edge_smooth) {
  if (m <= 0) throw std::invalid_argument("make_probe: m must be positive");
  if (!(radius >= 1.0) || radius > m / 2.0)
    throw std::invalid_argument("make_probe: radius must satisfy 1 <= radius <= m/2");
  if (edge_smooth < 0.0) throw std::invalid_argument("make_probe: edge_smooth must be >= 0");

  ComplexField p(m, m);
  const double c0 = m / 2;  // matches the centered-transform origin
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      const double d = std::hypot(r - c0, c - c0);
      double amp;
      if (edge_smooth == 0.0) {
        amp = d <= radius ? 1.0 : 0.0;
      } else {
        amp = std::clamp((radius - d) / edge_smooth, 0.0, 1.0);
      }
      p.at(r, c) = cdouble{amp, 0.0};
    }
  }
  const double e = energy(p);
  if (e == 0.0) throw std::invalid_argument("make_probe: empty aperture");
  const double s = 1.0 / std::sqrt(e);
  for (auto& v : p.values) v *= s;
  return p;
}

// rows x cols raster of spacing `step`, each position jittered by a uniform
// integer in [-jitter, jitter] per axis and clamped into bounds; row-major order
inline ScanGeometry make_scan(int rows, int cols, int step, int jitter, int m, int n,
                              std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("make_scan: grid must be at least 1x1");
  if (step < 1) throw std::invalid_argument("make_scan: step must be >= 1");
  if (jitter < 0) throw std::invalid_argument("make_scan: jitter must be >= 0");
  if (m < 1 || n < m) throw std::invalid_argument("make_scan: probe must fit inside object");
  if ((rows - 1) * step + m > n || (cols - 1) * step + m > n)
    throw std::invalid_argument("make_scan: scan grid does not fit object");

  Rng rng(seed);
  ScanGeometry geom;
  geom.probe_size = m;
  geom.object_size = n;
  geom.positions.reserve(static_cast<std::size_t>(rows) * cols);
  const int hi = n - m;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      int pr = r * step;
      int pc = c * step;
      if (jitter > 0) {
        pr += static_cast<int>(rng.uniform_int(-jitter, jitter));
        pc += static_cast<int>(rng.uniform_int(-jitter, jitter));
      }
      pr = std::clamp(pr, 0, hi);
      pc = std::clamp(pc, 0, hi);
      geom.positions.push_back({pr, pc});
    }
  }
  return geom;
}

// probe times the object window at position j
inline ComplexField exit_wave(const ComplexField& probe, const ComplexField& object,
                              const std::array<int, 2>& pos) {
  const int m = probe.height;
  ComplexField psi(m, m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) psi.at(r, c) = probe.at(r, c) * object.at(pos[0] + r, pos[1] + c);
  return psi;
}

// Far-field intensities |F psi_j|^2 for every scan position. When a photon
// budget is given, each pattern is scaled to that expected total and replaced
// by per-pixel Poisson draws; position j consumes generator seed+j so the
// draws do not depend on evaluation order.
inline DiffractionStack forward(const GroundTruth& truth, const ScanGeometry& geom,
                                std::optional<double> photons_per_pattern, std::uint64_t seed) {
  geom.validate();
  const int m = geom.probe_size;
  if (truth.probe.height != m || truth.probe.width != m)
    throw std::invalid_argument("forward: probe dimensions do not match geometry");
  if (truth.object.height != geom.object_size || truth.object.width != geom.object_size)
    throw std::invalid_argument("forward: object dimensions do not match geometry");
  if (photons_per_pattern && !(*photons_per_pattern > 0.0))
    throw std::invalid_argument("forward: photon budget must be positive");

  DiffractionStack stack;
  stack.count = static_cast<int>(geom.count());
  stack.size = m;
  stack.intensities.resize(static_cast<std::size_t>(stack.count) * m * m);

  for (int j = 0; j < stack.count; ++j) {
    const ComplexField spectrum = dft2_centered(exit_wave(truth.probe, truth.object, geom.positions[j]));
    double total = 0.0;
    for (std::size_t q = 0; q < spectrum.size(); ++q) {
      const double v = std::norm(spectrum.values[q]);
      stack.intensities[static_cast<std::size_t>(j) * m * m + q] = v;
      total += v;
    }
    if (photons_per_pattern) {
      const double scale = total > 0.0 ? *photons_per_pattern / total : 0.0;
      Rng rng(seed + static_cast<std::uint64_t>(j));
      for (std::size_t q = 0; q < spectrum.size(); ++q) {
        double& v = stack.intensities[static_cast<std::size_t>(j) * m * m + q];
        v = static_cast<double>(rng.poisson(scale * v));
      }
    }
  }
  return stack;
}

}  // namespace ptycho

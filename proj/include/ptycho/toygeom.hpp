#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ptycho/rng.hpp"

// Exact projections onto circles in the plane: the small feasibility
// playground used to validate the relaxation/reflection algebra before it is
// applied to the ptychographic product space.
namespace ptycho::toy {

struct PlanePoint {
  double x = 0.0;
  double y = 0.0;
};

inline PlanePoint operator+(PlanePoint a, PlanePoint b) { return {a.x + b.x, a.y + b.y}; }
inline PlanePoint operator-(PlanePoint a, PlanePoint b) { return {a.x - b.x, a.y - b.y}; }
inline PlanePoint operator*(double s, PlanePoint p) { return {s * p.x, s * p.y}; }
inline double distance(PlanePoint a, PlanePoint b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Circle {
  PlanePoint center;
  double radius = 1.0;

  Circle() = default;
  Circle(PlanePoint c, double r) : center(c), radius(r) {
    if (!(r > 0.0)) throw std::invalid_argument("Circle: radius must be positive");
  }
};

// One plane copy per circle constraint.
struct ProductPoint {
  std::vector<PlanePoint> components;
};

// Nearest point on the circle. A point exactly at the center projects onto the
// whole circle; the tie is broken deterministically to angle 0 and reported
// through `degenerate`.
inline PlanePoint project_circle(PlanePoint p, const Circle& c, bool* degenerate = nullptr) {
  if (degenerate) *degenerate = false;
  const double dx = p.x - c.center.x;
  const double dy = p.y - c.center.y;
  const double d = std::hypot(dx, dy);
  if (d == 0.0) {
    if (degenerate) *degenerate = true;
    return {c.center.x + c.radius, c.center.y};
  }
  const double s = c.radius / d;
  return {c.center.x + s * dx, c.center.y + s * dy};
}

// a*proj + (1-a)*p; a=1 the projection itself, a=0 the identity, a=2 the reflection
inline PlanePoint relax_point(PlanePoint p, PlanePoint proj, double a) {
  return {a * proj.x + (1.0 - a) * p.x, a * proj.y + (1.0 - a) * p.y};
}

enum class SweepOrder { fixed, shuffled };
enum class TraceGranularity { per_sweep, per_projection };

// Cyclic single projections through the circle list. Returns the iterate after
// each full sweep by default; per_projection records every intermediate
// projection (the granularity at which limit cycles on inconsistent sets are
// visible). The shuffled order re-randomizes each sweep from the seeded
// generator, so a fixed seed reproduces the trajectory exactly.
inline std::vector<PlanePoint> sp_iterate(PlanePoint p0, const std::vector<Circle>& circles,
                                          SweepOrder order, const std::vector<double>& relaxations,
                                          int iters, std::uint64_t seed,
                                          TraceGranularity granularity = TraceGranularity::per_sweep) {
  if (circles.empty()) throw std::invalid_argument("sp_iterate: empty circle list");
  if (relaxations.size() != circles.size())
    throw std::invalid_argument("sp_iterate: relaxations size must equal circle count");
  if (iters < 0) throw std::invalid_argument("sp_iterate: negative iteration count");

  Rng rng(seed);
  std::vector<std::size_t> visit(circles.size());
  std::iota(visit.begin(), visit.end(), std::size_t{0});

  std::vector<PlanePoint> trace;
  PlanePoint p = p0;
  for (int sweep = 0; sweep < iters; ++sweep) {
    if (order == SweepOrder::shuffled) rng.shuffle(visit);
    for (std::size_t i : visit) {
      p = relax_point(p, project_circle(p, circles[i]), relaxations[i]);
      if (granularity == TraceGranularity::per_projection) trace.push_back(p);
    }
    if (granularity == TraceGranularity::per_sweep) trace.push_back(p);
  }
  return trace;
}

// componentwise circle projection (the divide step)
inline ProductPoint product_divide(const ProductPoint& x, const std::vector<Circle>& circles) {
  if (x.components.size() != circles.size())
    throw std::invalid_argument("product_divide: component count must equal circle count");
  ProductPoint out;
  out.components.reserve(x.components.size());
  for (std::size_t i = 0; i < circles.size(); ++i)
    out.components.push_back(project_circle(x.components[i], circles[i]));
  return out;
}

// every component replaced by the mean of all components (projection onto the
// diagonal set, i.e. the concur step)
inline ProductPoint product_concur(const ProductPoint& x) {
  if (x.components.empty()) throw std::invalid_argument("product_concur: empty product point");
  PlanePoint m{0.0, 0.0};
  for (const auto& p : x.components) m = m + p;
  m = (1.0 / static_cast<double>(x.components.size())) * m;
  ProductPoint out;
  out.components.assign(x.components.size(), m);
  return out;
}

inline ProductPoint relax_product(const ProductPoint& x, const ProductPoint& proj, double a) {
  ProductPoint out;
  out.components.reserve(x.components.size());
  for (std::size_t i = 0; i < x.components.size(); ++i)
    out.components.push_back(relax_point(x.components[i], proj.components[i], a));
  return out;
}

inline ProductPoint divide_relaxed(const ProductPoint& x, const std::vector<Circle>& circles, double c) {
  return relax_product(x, product_divide(x, circles), c);
}

inline ProductPoint concur_relaxed(const ProductPoint& x, double b) {
  return relax_product(x, product_concur(x), b);
}

// x' = a * P^b_C(P^c_D x) + (1-a) * x on the circle product space, with exact
// projections; this is the algebraic reference for the ptychographic engine.
inline ProductPoint abc_step(const ProductPoint& x, const std::vector<Circle>& circles, double a,
                             double b, double c) {
  return relax_product(x, concur_relaxed(divide_relaxed(x, circles, c), b), a);
}

inline double max_component_distance(const ProductPoint& a, const ProductPoint& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.components.size(); ++i)
    d = std::max(d, distance(a.components[i], b.components[i]));
  return d;
}

// Brute-force minimal-period search over the trailing `window` points: the
// smallest p such that every point in the window matches the point p steps
// earlier within tol. Period 1 is a settled point, not a cycle.
inline std::optional<int> detect_cycle(const std::vector<PlanePoint>& trace, int window, double tol) {
  const int n = static_cast<int>(trace.size());
  if (window > n) window = n;
  if (window < 4) return std::nullopt;
  for (int period = 1; period <= window / 2; ++period) {
    bool ok = true;
    for (int k = n - window + period; k < n; ++k) {
      if (distance(trace[k], trace[k - period]) > tol) {
        ok = false;
        break;
      }
    }
    if (ok) {
      if (period == 1) return std::nullopt;
      return period;
    }
  }
  return std::nullopt;
}

}  // namespace ptycho::toy

#include <catch2/catch_amalgamated.hpp>

#include "ptycho/metrics.hpp"
#include "ptycho/rng.hpp"
#include "ptycho/simulate.hpp"

using namespace ptycho;

namespace {

ComplexField random_field(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  ComplexField f(h, w);
  for (auto& v : f.values) v = cdouble{rng.uniform_range(-1.0, 1.0), rng.uniform_range(-1.0, 1.0)};
  return f;
}

}  // namespace

TEST_CASE("data_error") {
  GroundTruth truth;
  truth.object = make_phantom(64, 0.4, 0.9, 5, 3);
  truth.probe = make_probe(16, 6.0, 1.0);
  const ScanGeometry geom = make_scan(3, 3, 12, 2, 16, 64, 3);
  const DiffractionStack data = forward(truth, geom, std::nullopt, 3);

  SECTION("true waves score zero") {
    ExitWaveSet x;
    for (std::size_t j = 0; j < geom.count(); ++j)
      x.waves.push_back(exit_wave(truth.probe, truth.object, geom.positions[j]));
    CHECK(data_error(x, data) < 1e-10);
  }
  SECTION("zero waves score one") {
    ExitWaveSet x;
    for (std::size_t j = 0; j < geom.count(); ++j) x.waves.push_back(ComplexField(16, 16));
    CHECK(data_error(x, data) == Catch::Approx(1.0).epsilon(1e-12));
  }
  SECTION("matches a direct elementwise evaluation") {
    DiffractionStack small;
    small.count = 1;
    small.size = 4;
    Rng rng(8);
    small.intensities.resize(16);
    for (auto& v : small.intensities) v = rng.uniform_range(0.0, 2.0);
    ExitWaveSet x;
    x.waves.push_back(random_field(4, 4, 9));
    const ComplexField spectrum = dft2_centered(x.waves[0]);
    double num = 0.0, den = 0.0;
    for (std::size_t q = 0; q < spectrum.size(); ++q) {
      const double d = std::abs(spectrum.values[q]) - std::sqrt(small.intensities[q]);
      num += d * d;
      den += small.intensities[q];
    }
    CHECK(data_error(x, small) == Catch::Approx(std::sqrt(num / den)).epsilon(1e-12));
  }
  SECTION("all-zero data is rejected") {
    DiffractionStack zeros;
    zeros.count = 1;
    zeros.size = 4;
    zeros.intensities.assign(16, 0.0);
    ExitWaveSet x;
    x.waves.push_back(random_field(4, 4, 10));
    CHECK_THROWS_AS(data_error(x, zeros), std::invalid_argument);
  }
}

TEST_CASE("align_complex") {
  const ComplexField truth = random_field(8, 8, 20);
  const MetricRegion region{0, 0, 8, 8};

  SECTION("pure global phase is removed") {
    ComplexField rec(8, 8);
    for (std::size_t i = 0; i < rec.size(); ++i) rec.values[i] = cdouble{0.0, 1.0} * truth.values[i];
    const Alignment a = align_complex(rec, truth, region);
    CHECK(std::abs(a.gamma - cdouble{0.0, -1.0}) < 1e-12);
    for (std::size_t i = 0; i < rec.size(); ++i)
      CHECK(std::abs(a.aligned.values[i] - truth.values[i]) < 1e-12);
  }
  SECTION("pure scale is removed") {
    ComplexField rec(8, 8);
    for (std::size_t i = 0; i < rec.size(); ++i) rec.values[i] = 2.0 * truth.values[i];
    const Alignment a = align_complex(rec, truth, region);
    CHECK(std::abs(a.gamma - cdouble{0.5, 0.0}) < 1e-12);
  }
  SECTION("gamma matches a dense real least-squares solve") {
    const ComplexField rec = random_field(8, 8, 21);
    const Alignment a = align_complex(rec, truth, region);
    // real 2x2 normal equations for min ||gamma*rec - truth||^2
    double a11 = 0.0, b1 = 0.0, b2 = 0.0;
    for (std::size_t i = 0; i < rec.size(); ++i) {
      const cdouble r = rec.values[i], t = truth.values[i];
      a11 += std::norm(r);
      b1 += r.real() * t.real() + r.imag() * t.imag();
      b2 += r.real() * t.imag() - r.imag() * t.real();
    }
    const cdouble expect{b1 / a11, b2 / a11};
    CHECK(std::abs(a.gamma - expect) < 1e-12);
  }
  SECTION("zero reconstruction on the region is rejected") {
    const ComplexField rec(8, 8);
    CHECK_THROWS_AS(align_complex(rec, truth, region), std::invalid_argument);
  }
  SECTION("sub-region alignment only sees the region") {
    ComplexField rec = truth;
    rec.at(7, 7) = cdouble{100.0, -40.0};  // junk outside the region
    const MetricRegion sub{1, 1, 4, 4};
    const Alignment a = align_complex(rec, truth, sub);
    CHECK(std::abs(a.gamma - cdouble{1.0, 0.0}) < 1e-12);
  }
}

TEST_CASE("object_nrmse") {
  const ComplexField truth = random_field(16, 16, 30);
  const MetricRegion region = central_region(16);

  SECTION("global phase gives zero error") {
    for (double theta : {0.4, 2.0, -1.3}) {
      ComplexField rec(16, 16);
      for (std::size_t i = 0; i < rec.size(); ++i)
        rec.values[i] = std::polar(1.0, theta) * truth.values[i];
      CHECK(object_nrmse(rec, truth, region) < 1e-12);
    }
  }
  SECTION("small perturbations scale linearly") {
    const double eps = 1e-4;
    ComplexField rec = truth;
    Rng rng(31);
    ComplexField noise(16, 16);
    for (std::size_t i = 0; i < rec.size(); ++i) {
      noise.values[i] = cdouble{rng.uniform_range(-1.0, 1.0), rng.uniform_range(-1.0, 1.0)};
      rec.values[i] += eps * noise.values[i];
    }
    const double e = object_nrmse(rec, truth, region);
    CHECK(e > 0.0);
    CHECK(e < 4.0 * eps);  // ||noise|| is O(1) relative to ||truth||
  }
  SECTION("matches the direct formula") {
    const ComplexField rec = random_field(16, 16, 32);
    const Alignment a = align_complex(rec, truth, region);
    double num = 0.0, den = 0.0;
    for (int r = region.top; r < region.top + region.height; ++r) {
      for (int c = region.left; c < region.left + region.width; ++c) {
        num += std::norm(a.aligned.at(r, c) - truth.at(r, c));
        den += std::norm(truth.at(r, c));
      }
    }
    CHECK(object_nrmse(rec, truth, region) == Catch::Approx(std::sqrt(num / den)).epsilon(1e-12));
  }
  SECTION("invariant under any nonzero complex rescale") {
    const ComplexField rec = random_field(16, 16, 33);
    const double base = object_nrmse(rec, truth, region);
    for (cdouble kappa : {cdouble{3.0, 0.0}, cdouble{0.0, -0.2}, cdouble{-1.4, 2.2}}) {
      ComplexField scaled(16, 16);
      for (std::size_t i = 0; i < rec.size(); ++i) scaled.values[i] = kappa * rec.values[i];
      CHECK(std::abs(object_nrmse(scaled, truth, region) - base) < 1e-12);
    }
  }
  SECTION("truth scores zero against itself") {
    CHECK(object_nrmse(truth, truth, region) < 1e-14);
  }
}

TEST_CASE("central_region covers half of each dimension") {
  const MetricRegion r = central_region(160);
  CHECK(r.top == 40);
  CHECK(r.left == 40);
  CHECK(r.height == 80);
  CHECK(r.width == 80);
  REQUIRE_NOTHROW(r.validate(160));
}

#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "ptycho/bundleio.hpp"
#include "ptycho/simulate.hpp"

using namespace ptycho;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ptycho_bundleio_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

io::Bundle sample_bundle(const fs::path& dir) {
  GroundTruth truth;
  truth.object = make_phantom(64, 0.4, 0.9, 5, 3);
  truth.probe = make_probe(16, 6.0, 1.0);
  const ScanGeometry geom = make_scan(3, 3, 12, 2, 16, 64, 3);
  const DiffractionStack stack = forward(truth, geom, 1e4, 3);
  io::BundleMeta meta;
  meta.seed = 3;
  meta.photons_per_pattern = 1e4;
  meta.probe_config = "custom";
  io::write_bundle(dir, stack, geom, &truth, meta);
  return io::read_bundle(dir);
}

}  // namespace

TEST_CASE("bundle round trip is bit exact") {
  const fs::path dir_a = fresh_dir("a");
  const fs::path dir_b = fresh_dir("b");
  const io::Bundle bundle = sample_bundle(dir_a);

  CHECK(bundle.meta.seed == 3);
  CHECK(bundle.meta.photons_per_pattern == 1e4);
  CHECK(bundle.meta.probe_config == "custom");
  REQUIRE(bundle.truth.has_value());

  // write the values read back; every blob must come out byte-identical
  io::write_bundle(dir_b, bundle.stack, bundle.geom, &*bundle.truth, bundle.meta);
  for (const char* name : {"manifest.json", "patterns.f32", "positions.i32", "truth_object.cf32",
                           "truth_probe.cf32"}) {
    CHECK(slurp(dir_a / name) == slurp(dir_b / name));
  }
}

TEST_CASE("bundle read failures name the offending field") {
  SECTION("version mismatch") {
    const fs::path dir = fresh_dir("version");
    sample_bundle(dir);
    auto manifest = slurp(dir / "manifest.json");
    std::string text(manifest.begin(), manifest.end());
    const auto at = text.find("PTYB1");
    REQUIRE(at != std::string::npos);
    text.replace(at, 5, "PTYB9");
    std::ofstream(dir / "manifest.json", std::ios::trunc) << text;
    CHECK_THROWS_WITH(io::read_bundle(dir), Catch::Matchers::ContainsSubstring("PTYB9"));
  }
  SECTION("patterns blob sized for the wrong pattern count") {
    const fs::path dir = fresh_dir("sizes");
    sample_bundle(dir);
    const auto bytes = slurp(dir / "patterns.f32");
    std::ofstream out(dir / "patterns.f32", std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 16 * 16 * 4));
    out.close();
    CHECK_THROWS_WITH(io::read_bundle(dir), Catch::Matchers::ContainsSubstring("size mismatch: patterns"));
  }
  SECTION("missing directory") {
    CHECK_THROWS_AS(io::read_bundle(fs::temp_directory_path() / "ptycho_does_not_exist"),
                    std::runtime_error);
  }
}

TEST_CASE("trace csv") {
  const fs::path dir = fresh_dir("csv");

  SECTION("empty trace list gives a header-only file") {
    io::write_trace_csv({}, dir / "empty.csv");
    const auto bytes = slurp(dir / "empty.csv");
    CHECK(std::string(bytes.begin(), bytes.end()) == "preset,iter,data_error,object_nrmse,elapsed_ms\n");
  }
  SECTION("one preset with three records is four lines") {
    ErrorTrace trace;
    trace.label = "dc";
    trace.records = {{1, 0.5, std::nullopt, 4.0}, {2, 0.25, std::nullopt, 8.0}, {3, 0.125, std::nullopt, 12.0}};
    io::write_trace_csv({trace}, dir / "three.csv");
    const auto bytes = slurp(dir / "three.csv");
    const std::string text(bytes.begin(), bytes.end());
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
    CHECK(text.find("dc,1,0.5,,\n") != std::string::npos);
    // the elapsed column stays blank by default so identical runs match bytewise
    CHECK(text.find("dc,3,0.125,,\n") != std::string::npos);
  }
  SECTION("rewriting the same traces is byte-identical") {
    ErrorTrace trace;
    trace.label = "raar:0.75";
    trace.records = {{1, 0.123456789012345678, 0.25, 1.0}, {2, 1e-13, 0.125, 2.0}};
    io::CsvOptions options;
    options.comments = {"seed=7"};
    options.include_status = true;
    io::write_trace_csv({trace}, dir / "x.csv", options);
    io::write_trace_csv({trace}, dir / "y.csv", options);
    CHECK(slurp(dir / "x.csv") == slurp(dir / "y.csv"));
    const auto bytes = slurp(dir / "x.csv");
    const std::string text(bytes.begin(), bytes.end());
    CHECK(text.starts_with("# seed=7\npreset,iter,data_error,object_nrmse,elapsed_ms,status\n"));
    CHECK(text.find(",ok\n") != std::string::npos);
  }
  SECTION("a diverged trace is flagged on its last record") {
    ErrorTrace trace;
    trace.label = "sf";
    trace.records = {{1, 0.5, std::nullopt, 1.0}, {2, 50.0, std::nullopt, 2.0}};
    trace.status = RunStatus::diverged;
    trace.diverged_at = 3;
    io::CsvOptions options;
    options.include_status = true;
    io::write_trace_csv({trace}, dir / "div.csv", options);
    const auto bytes = slurp(dir / "div.csv");
    const std::string text(bytes.begin(), bytes.end());
    CHECK(text.find("sf,1,0.5,,,ok\n") != std::string::npos);
    CHECK(text.find("sf,2,50,,,diverged\n") != std::string::npos);
  }
}

TEST_CASE("pgm renders") {
  const fs::path dir = fresh_dir("pgm");

  SECTION("constant modulus is a uniform max-value image") {
    const ComplexField f(4, 6, cdouble{0.7, 0.0});
    io::render_field(f, io::RenderKind::modulus, dir / "flat.pgm");
    const auto bytes = slurp(dir / "flat.pgm");
    const std::string header = "P5\n6 4\n65535\n";
    REQUIRE(bytes.size() == header.size() + 2 * 24);
    CHECK(std::string(bytes.begin(), bytes.begin() + header.size()) == header);
    for (std::size_t i = header.size(); i < bytes.size(); i += 2) {
      CHECK(static_cast<unsigned char>(bytes[i]) == 0xff);
      CHECK(static_cast<unsigned char>(bytes[i + 1]) == 0xff);
    }
  }
  SECTION("phase of a real positive field is the uniform midpoint") {
    const ComplexField f(3, 3, cdouble{2.5, 0.0});
    io::render_field(f, io::RenderKind::phase, dir / "phase.pgm");
    const auto bytes = slurp(dir / "phase.pgm");
    const std::string header = "P5\n3 3\n65535\n";
    for (std::size_t i = header.size(); i < bytes.size(); i += 2) {
      const int v = (static_cast<unsigned char>(bytes[i]) << 8) | static_cast<unsigned char>(bytes[i + 1]);
      CHECK(v == 32768);  // phase 0 maps to the middle of [-pi, pi)
    }
  }
  SECTION("phantom modulus render is bimodal") {
    const ComplexField phantom = make_phantom(128, 0.4, 1.0, 12, 7);
    io::render_field(phantom, io::RenderKind::modulus, dir / "phantom.pgm");
    const auto bytes = slurp(dir / "phantom.pgm");
    const std::string header = "P5\n128 128\n65535\n";
    REQUIRE(bytes.size() == header.size() + 2 * 128 * 128);
    int high = 0, low = 0, total = 0;
    for (std::size_t i = header.size(); i < bytes.size(); i += 2) {
      const int v = (static_cast<unsigned char>(bytes[i]) << 8) | static_cast<unsigned char>(bytes[i + 1]);
      ++total;
      if (v > 0.95 * 65535) ++high;
      if (v < 0.8 * 65535) ++low;
    }
    CHECK(high > total / 20);  // background plateau
    CHECK(low > total / 100);  // cell interiors
  }
}

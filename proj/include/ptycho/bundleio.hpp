#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ptycho/engine.hpp"
#include "ptycho/simulate.hpp"

// On-disk formats: the PTYB1 dataset bundle (JSON manifest plus raw
// little-endian blobs), plot-ready trace CSVs, and 16-bit PGM renders.
// Doubles are truncated to float32 at rest; reading returns the truncated
// values, so a write/read/write cycle is bit-stable.
namespace ptycho::io {

static_assert(std::endian::native == std::endian::little,
              "bundle blobs are defined little-endian; big-endian hosts are unsupported");

namespace fs = std::filesystem;

inline constexpr const char* kBundleFormat = "PTYB1";

struct BundleMeta {
  std::uint64_t seed = 0;
  std::optional<double> photons_per_pattern;
  std::string probe_config;  // free-form tag, e.g. "big", "small", "custom"
};

struct Bundle {
  DiffractionStack stack;
  ScanGeometry geom;
  std::optional<GroundTruth> truth;
  BundleMeta meta;
};

namespace detail {

// write bytes to a sibling temp file, then rename over the target
inline void write_file_atomic(const fs::path& path, const void* data, std::size_t bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
    if (!out) throw std::runtime_error("write failed: " + path.string());
  }
  fs::rename(tmp, path);
}

inline void write_file_atomic(const fs::path& path, const std::string& text) {
  write_file_atomic(path, text.data(), text.size());
}

inline std::vector<char> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

inline void expect_size(const std::string& name, std::size_t expected, std::size_t found) {
  if (expected != found)
    throw std::runtime_error("size mismatch: " + name + " (expected " + std::to_string(expected) +
                             " bytes, found " + std::to_string(found) + ")");
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// complex field as interleaved re/im float32, row-major
inline void write_cf32(const fs::path& path, const ComplexField& f) {
  std::vector<float> buf(2 * f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    buf[2 * i] = static_cast<float>(f.values[i].real());
    buf[2 * i + 1] = static_cast<float>(f.values[i].imag());
  }
  detail::write_file_atomic(path, buf.data(), buf.size() * sizeof(float));
}

inline ComplexField read_cf32(const fs::path& path, int height, int width, const std::string& name) {
  const std::vector<char> bytes = detail::read_file(path);
  const std::size_t expected = static_cast<std::size_t>(height) * width * 2 * sizeof(float);
  detail::expect_size(name, expected, bytes.size());
  ComplexField f(height, width);
  const float* v = reinterpret_cast<const float*>(bytes.data());
  for (std::size_t i = 0; i < f.size(); ++i) f.values[i] = cdouble{v[2 * i], v[2 * i + 1]};
  return f;
}

inline void write_bundle(const fs::path& dir, const DiffractionStack& stack,
                         const ScanGeometry& geom, const GroundTruth* truth,
                         const BundleMeta& meta) {
  geom.validate();
  if (stack.count != static_cast<int>(geom.count()) || stack.size != geom.probe_size)
    throw std::invalid_argument("write_bundle: stack does not match geometry");
  fs::create_directories(dir);

  std::vector<float> patterns(stack.intensities.size());
  for (std::size_t i = 0; i < patterns.size(); ++i)
    patterns[i] = static_cast<float>(stack.intensities[i]);
  detail::write_file_atomic(dir / "patterns.f32", patterns.data(), patterns.size() * sizeof(float));

  std::vector<std::int32_t> positions;
  positions.reserve(2 * geom.count());
  for (const auto& p : geom.positions) {
    positions.push_back(p[0]);
    positions.push_back(p[1]);
  }
  detail::write_file_atomic(dir / "positions.i32", positions.data(),
                            positions.size() * sizeof(std::int32_t));

  nlohmann::json manifest{
      {"format", kBundleFormat},
      {"dtype", "float32"},
      {"endianness", "little"},
      {"pattern_count", stack.count},
      {"pattern_size", stack.size},
      {"object_size", geom.object_size},
      {"seed", meta.seed},
      {"probe_config", meta.probe_config},
      {"has_truth", truth != nullptr},
      {"files",
       {{"patterns", "patterns.f32"}, {"positions", "positions.i32"}}},
  };
  if (meta.photons_per_pattern)
    manifest["photons_per_pattern"] = *meta.photons_per_pattern;
  else
    manifest["photons_per_pattern"] = nullptr;

  if (truth) {
    write_cf32(dir / "truth_object.cf32", truth->object);
    write_cf32(dir / "truth_probe.cf32", truth->probe);
    manifest["files"]["truth_object"] = "truth_object.cf32";
    manifest["files"]["truth_probe"] = "truth_probe.cf32";
  }
  detail::write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

inline Bundle read_bundle(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(detail::read_file(manifest_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("malformed manifest: " + manifest_path.string() + ": " + e.what());
  }

  const std::string format = manifest.value("format", "");
  if (format != kBundleFormat) throw std::runtime_error("unsupported bundle version: " + format);
  if (manifest.value("dtype", "") != "float32")
    throw std::runtime_error("unsupported dtype: " + manifest.value("dtype", ""));
  if (manifest.value("endianness", "") != "little")
    throw std::runtime_error("unsupported endianness: " + manifest.value("endianness", ""));

  Bundle bundle;
  const int count = manifest.at("pattern_count").get<int>();
  const int size = manifest.at("pattern_size").get<int>();
  const int object_size = manifest.at("object_size").get<int>();
  if (count < 1 || size < 1 || object_size < size)
    throw std::runtime_error("manifest declares invalid dimensions");
  bundle.meta.seed = manifest.value("seed", std::uint64_t{0});
  if (manifest.contains("photons_per_pattern") && !manifest["photons_per_pattern"].is_null())
    bundle.meta.photons_per_pattern = manifest["photons_per_pattern"].get<double>();
  bundle.meta.probe_config = manifest.value("probe_config", "");

  const auto& files = manifest.at("files");

  const std::vector<char> pattern_bytes = detail::read_file(dir / files.at("patterns").get<std::string>());
  detail::expect_size("patterns", static_cast<std::size_t>(count) * size * size * sizeof(float),
                      pattern_bytes.size());
  bundle.stack.count = count;
  bundle.stack.size = size;
  bundle.stack.intensities.resize(static_cast<std::size_t>(count) * size * size);
  {
    const float* v = reinterpret_cast<const float*>(pattern_bytes.data());
    for (std::size_t i = 0; i < bundle.stack.intensities.size(); ++i) {
      if (!(v[i] >= 0.0f) || !std::isfinite(v[i]))
        throw std::runtime_error("patterns contain negative or non-finite values");
      bundle.stack.intensities[i] = v[i];
    }
  }

  const std::vector<char> pos_bytes = detail::read_file(dir / files.at("positions").get<std::string>());
  detail::expect_size("positions", static_cast<std::size_t>(count) * 2 * sizeof(std::int32_t),
                      pos_bytes.size());
  bundle.geom.probe_size = size;
  bundle.geom.object_size = object_size;
  bundle.geom.positions.resize(static_cast<std::size_t>(count));
  {
    const std::int32_t* v = reinterpret_cast<const std::int32_t*>(pos_bytes.data());
    for (int j = 0; j < count; ++j) bundle.geom.positions[j] = {v[2 * j], v[2 * j + 1]};
  }
  bundle.geom.validate();

  if (manifest.value("has_truth", false)) {
    GroundTruth truth;
    truth.object = read_cf32(dir / files.at("truth_object").get<std::string>(), object_size,
                             object_size, "truth_object");
    truth.probe = read_cf32(dir / files.at("truth_probe").get<std::string>(), size, size, "truth_probe");
    bundle.truth = std::move(truth);
  }
  return bundle;
}

struct CsvOptions {
  std::vector<std::string> comments;  // written as leading "# " lines
  bool include_status = false;        // append a status column (used by compare)
  bool include_timings = false;       // fill elapsed_ms; off by default so re-runs are byte-identical
};

// One row per trace record under the header
// preset,iter,data_error,object_nrmse,elapsed_ms with 17-significant-digit
// numbers; object_nrmse stays blank without ground truth. elapsed_ms is blank
// unless timings were requested, keeping equal-seed runs byte-identical.
inline void write_trace_csv(const std::vector<ErrorTrace>& traces, const fs::path& path,
                            const CsvOptions& options = {}) {
  std::string out;
  for (const auto& line : options.comments) out += "# " + line + "\n";
  out += "preset,iter,data_error,object_nrmse,elapsed_ms";
  if (options.include_status) out += ",status";
  out += "\n";
  for (const auto& trace : traces) {
    for (const auto& rec : trace.records) {
      out += trace.label;
      out += ',';
      out += std::to_string(rec.iter);
      out += ',';
      out += detail::format_double(rec.data_error);
      out += ',';
      if (rec.object_nrmse) out += detail::format_double(*rec.object_nrmse);
      out += ',';
      if (options.include_timings) out += detail::format_double(rec.elapsed_ms);
      if (options.include_status) {
        out += ',';
        const bool last = &rec == &trace.records.back();
        if (trace.status == RunStatus::diverged && last)
          out += "diverged";
        else
          out += "ok";
      }
      out += "\n";
    }
    // a run that diverges before producing any record still shows up, flagged
    if (trace.records.empty() && trace.status == RunStatus::diverged && options.include_status)
      out += trace.label + ",,,,,diverged\n";
  }
  detail::write_file_atomic(path, out);
}

enum class RenderKind { modulus, phase };

// 16-bit binary PGM (P5, maxval 65535, big-endian samples per the format).
// Modulus maps [0, max] to [0, 65535]; phase maps [-pi, pi) to [0, 65535].
inline void render_field(const ComplexField& f, RenderKind kind, const fs::path& path) {
  std::string out = "P5\n" + std::to_string(f.width) + " " + std::to_string(f.height) + "\n65535\n";
  out.reserve(out.size() + 2 * f.size());
  if (kind == RenderKind::modulus) {
    double peak = 0.0;
    for (const auto& v : f.values) peak = std::max(peak, std::abs(v));
    for (const auto& v : f.values) {
      const double t = peak > 0.0 ? std::abs(v) / peak : 0.0;
      const auto u = static_cast<std::uint16_t>(std::floor(t * 65535.0 + 0.5));
      out += static_cast<char>(u >> 8);
      out += static_cast<char>(u & 0xff);
    }
  } else {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (const auto& v : f.values) {
      const double phase = std::arg(v);  // [-pi, pi]
      double t = (phase + std::numbers::pi) / two_pi * 65536.0;
      const auto u = static_cast<std::uint16_t>(std::min(std::floor(t), 65535.0));
      out += static_cast<char>(u >> 8);
      out += static_cast<char>(u & 0xff);
    }
  }
  detail::write_file_atomic(path, out);
}

}  // namespace ptycho::io

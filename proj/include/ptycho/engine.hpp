#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ptycho/metrics.hpp"
#include "ptycho/projections.hpp"
#include "ptycho/rng.hpp"

// The generalized three-relaxation iteration
//   x_{k+1} = a * P^b_C(P^c_D x_k) + (1-a) * x_k
// with a preset table realizing the classical projection algorithms, plus the
// sequential (position-by-position) mode and the traced run loop.
namespace ptycho {

enum class Preset { dc, ar, dr, sf, raar, rrr, tlambda, custom };
enum class SpOrder { fixed, shuffled };

struct Triple {
  double a = 1.0, b = 1.0, c = 1.0;
};

inline std::string preset_name(Preset p) {
  switch (p) {
    case Preset::dc: return "dc";
    case Preset::ar: return "ar";
    case Preset::dr: return "dr";
    case Preset::sf: return "sf";
    case Preset::raar: return "raar";
    case Preset::rrr: return "rrr";
    case Preset::tlambda: return "tlambda";
    case Preset::custom: return "custom";
  }
  return "?";
}

inline Preset parse_preset(std::string_view name) {
  if (name == "dc") return Preset::dc;
  if (name == "ar") return Preset::ar;
  if (name == "dr") return Preset::dr;
  if (name == "sf") return Preset::sf;
  if (name == "raar") return Preset::raar;
  if (name == "rrr") return Preset::rrr;
  if (name == "tlambda") return Preset::tlambda;
  if (name == "custom") return Preset::custom;
  throw std::invalid_argument("unknown preset: " + std::string(name) +
                              " (valid: dc, ar, dr, sf, raar, rrr, tlambda, custom)");
}

// The (a, b, c) realizations of the named algorithms. These follow from the
// literature forms of each method by expanding only the relaxation of the
// outermost projection, so none of them assumes linearity of the projections:
//   dc         (1, 1, 1)                P_C P_D
//   ar = dr    (1/2, 2, 2)              averaged reflections / Douglas-Rachford
//   sf         (1, 2, 1)                R_C P_D, the solvent-flip map
//   raar(B)    (1/2, 2B, 2)             B*P_C(R_D x) + (1-2B)*P_D x + B*x
//   rrr(B)     (B/2, 2, 2)              x + B*(P_C(R_D x) - P_D x)
//   tlambda(L) (1/(1+L), 1+L, 1+L)      relaxed DR family; L=1 reduces to ar
inline Triple preset_params(Preset preset, std::optional<double> parameter = std::nullopt) {
  const bool takes_param = preset == Preset::raar || preset == Preset::rrr || preset == Preset::tlambda;
  if (takes_param) {
    if (!parameter) throw std::invalid_argument(preset_name(preset) + " requires a parameter");
    if (!(*parameter > 0.0) || *parameter > 1.0)
      throw std::invalid_argument(preset_name(preset) + " parameter must lie in (0, 1]");
  }
  switch (preset) {
    case Preset::dc: return {1.0, 1.0, 1.0};
    case Preset::ar:
    case Preset::dr: return {0.5, 2.0, 2.0};
    case Preset::sf: return {1.0, 2.0, 1.0};
    case Preset::raar: return {0.5, 2.0 * *parameter, 2.0};
    case Preset::rrr: return {*parameter / 2.0, 2.0, 2.0};
    case Preset::tlambda: return {1.0 / (1.0 + *parameter), 1.0 + *parameter, 1.0 + *parameter};
    case Preset::custom:
      throw std::invalid_argument("custom preset takes explicit a, b, c instead of a table entry");
  }
  throw std::invalid_argument("preset_params: unknown preset");
}

struct AlgoParams {
  double a = 1.0, b = 1.0, c = 1.0;  // used directly when preset == custom
  Preset preset = Preset::custom;
  double beta_or_lambda = 0.75;
  int iters = 100;
  int inner_iters = 1;
  double eps_frac = 1e-12;
  double reg_frac = 1e-9;
  std::uint64_t seed = 0;
  bool renorm = true;
  SpOrder sp_order = SpOrder::fixed;
  double sp_alpha_obj = 1.0;
  double sp_alpha_probe = 1.0;
};

// fills (a, b, c) from the preset table unless the preset is custom
inline AlgoParams resolve_preset(AlgoParams p) {
  if (p.preset != Preset::custom) {
    const Triple t = preset_params(p.preset, p.beta_or_lambda);
    p.a = t.a;
    p.b = t.b;
    p.c = t.c;
  }
  return p;
}

struct TraceRecord {
  int iter = 0;
  double data_error = 0.0;
  std::optional<double> object_nrmse;
  double elapsed_ms = 0.0;  // cumulative wall time since the run started
};

enum class RunStatus { ok, diverged };

struct ErrorTrace {
  std::string label;
  std::vector<TraceRecord> records;
  RunStatus status = RunStatus::ok;
  int diverged_at = -1;
};

struct RunResult {
  ProbeObjectPair pair;
  ErrorTrace trace;
};

// one generalized step: divide with relaxation c, concur with relaxation b,
// then blend with the previous iterate by a
inline std::pair<ExitWaveSet, ProbeObjectPair> abc_step(const ExitWaveSet& x,
                                                        const DiffractionStack& data,
                                                        const ScanGeometry& geom,
                                                        const ProbeObjectPair& pair_seed,
                                                        const AlgoParams& params) {
  const ExitWaveSet y = divide_project(x, data, params.c, params.eps_frac);
  ConcurResult con = concur_project(y, geom, pair_seed, params.b, params.inner_iters,
                                    params.reg_frac, params.renorm);
  return {relax_waves(x, con.waves, params.a), std::move(con.pair)};
}

namespace detail {

inline bool all_finite_waves(const ExitWaveSet& x) {
  for (const auto& w : x.waves)
    if (!all_finite(w)) return false;
  return true;
}

inline std::optional<double> maybe_nrmse(const ProbeObjectPair& pair, const GroundTruth* truth,
                                         const MetricRegion* region) {
  if (!truth || !region) return std::nullopt;
  return object_nrmse(pair.object, truth->object, *region);
}

}  // namespace detail

// Full reconstruction loop: exit waves are seeded from the initial pair, the
// abc step iterates with the pair warm-starting each concur, and the trace
// records the per-iteration data error (of the iterate) and, when ground truth
// is supplied, the object error of the current pair estimate. A non-finite
// iterate stops the run with status `diverged`; the trace up to that point is
// kept.
inline RunResult run(const DiffractionStack& data, const ScanGeometry& geom,
                     const ProbeObjectPair& init, const AlgoParams& raw_params,
                     const GroundTruth* truth = nullptr, const MetricRegion* region = nullptr) {
  const AlgoParams params = resolve_preset(raw_params);
  if (params.iters < 1) throw std::invalid_argument("run: iters must be >= 1");
  geom.validate();

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_ms = [&t0] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };

  ExitWaveSet x;
  x.waves.reserve(geom.count());
  for (std::size_t j = 0; j < geom.count(); ++j)
    x.waves.push_back(exit_wave(init.probe, init.object, geom.positions[j]));

  RunResult result;
  result.pair = init;
  result.trace.label = preset_name(params.preset);
  for (int k = 1; k <= params.iters; ++k) {
    auto [next, pair] = abc_step(x, data, geom, result.pair, params);
    x = std::move(next);
    result.pair = std::move(pair);
    if (!detail::all_finite_waves(x) || !all_finite(result.pair.object) ||
        !all_finite(result.pair.probe)) {
      result.trace.status = RunStatus::diverged;
      result.trace.diverged_at = k;
      break;
    }
    result.trace.records.push_back(
        {k, data_error(x, data), detail::maybe_nrmse(result.pair, truth, region), elapsed_ms()});
  }
  return result;
}

// Sequential mode: sweep the scan positions one at a time, pulling each local
// exit wave toward its magnitude constraint and feeding the correction back
// into the live probe/object pair (the first-order local consistency step).
// The pair itself is the iterate; the trace is recorded per sweep from the
// synthesized waves.
inline RunResult sp_run(const DiffractionStack& data, const ScanGeometry& geom,
                        const ProbeObjectPair& init, const AlgoParams& params,
                        const GroundTruth* truth = nullptr, const MetricRegion* region = nullptr) {
  if (params.iters < 1) throw std::invalid_argument("sp_run: iters must be >= 1");
  geom.validate();
  const int m = geom.probe_size;
  if (static_cast<int>(geom.count()) != data.count)
    throw std::invalid_argument("sp_run: geometry does not match pattern count");

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_ms = [&t0] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };

  RunResult result;
  result.pair = init;
  result.trace.label = "sp";
  Rng rng(params.seed);
  std::vector<std::size_t> visit(geom.count());
  std::iota(visit.begin(), visit.end(), std::size_t{0});
  std::vector<double> amplitude(static_cast<std::size_t>(m) * m);

  for (int sweep = 1; sweep <= params.iters; ++sweep) {
    if (params.sp_order == SpOrder::shuffled) rng.shuffle(visit);
    for (std::size_t j : visit) {
      const auto pos = geom.positions[j];
      const ComplexField psi = exit_wave(result.pair.probe, result.pair.object, pos);
      const double* intensity = data.pattern(static_cast<int>(j));
      for (std::size_t q = 0; q < amplitude.size(); ++q) amplitude[q] = std::sqrt(intensity[q]);
      const ComplexField corrected = project_modulus(psi, amplitude, params.eps_frac);

      double probe_peak = 0.0, window_peak = 0.0;
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
          probe_peak = std::max(probe_peak, std::norm(result.pair.probe.at(r, c)));
          window_peak = std::max(window_peak, std::norm(result.pair.object.at(pos[0] + r, pos[1] + c)));
        }
      }
      // object window before its own update feeds the probe step
      ComplexField window(m, m);
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) window.at(r, c) = result.pair.object.at(pos[0] + r, pos[1] + c);

      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
          const cdouble delta = corrected.at(r, c) - psi.at(r, c);
          if (probe_peak > 0.0)
            result.pair.object.at(pos[0] + r, pos[1] + c) +=
                params.sp_alpha_obj * std::conj(result.pair.probe.at(r, c)) / probe_peak * delta;
          if (window_peak > 0.0)
            result.pair.probe.at(r, c) +=
                params.sp_alpha_probe * std::conj(window.at(r, c)) / window_peak * delta;
        }
      }
    }

    if (!all_finite(result.pair.object) || !all_finite(result.pair.probe)) {
      result.trace.status = RunStatus::diverged;
      result.trace.diverged_at = sweep;
      break;
    }
    ExitWaveSet synth;
    synth.waves.reserve(geom.count());
    for (std::size_t j = 0; j < geom.count(); ++j)
      synth.waves.push_back(exit_wave(result.pair.probe, result.pair.object, geom.positions[j]));
    result.trace.records.push_back(
        {sweep, data_error(synth, data), detail::maybe_nrmse(result.pair, truth, region), elapsed_ms()});
  }
  return result;
}

struct PresetSpec {
  Preset preset = Preset::dc;
  std::optional<double> parameter;

  std::string label() const {
    if (!parameter) return preset_name(preset);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", *parameter);
    return preset_name(preset) + ":" + buf;
  }
};

// Runs every preset from the identical init and seed and returns the aligned
// traces. A diverging preset keeps its truncated, flagged trace and does not
// abort the rest.
inline std::vector<ErrorTrace> compare(const DiffractionStack& data, const ScanGeometry& geom,
                                       const ProbeObjectPair& init,
                                       const std::vector<PresetSpec>& presets, int iters,
                                       const AlgoParams& base, const GroundTruth* truth = nullptr,
                                       const MetricRegion* region = nullptr) {
  if (presets.empty()) throw std::invalid_argument("compare: preset list is empty");
  std::vector<ErrorTrace> traces;
  traces.reserve(presets.size());
  for (const auto& spec : presets) {
    AlgoParams params = base;
    params.preset = spec.preset;
    if (spec.parameter) params.beta_or_lambda = *spec.parameter;
    params.iters = iters;
    RunResult r = run(data, geom, init, params, truth, region);
    r.trace.label = spec.label();
    traces.push_back(std::move(r.trace));
  }
  return traces;
}

}  // namespace ptycho

// Command-line front end: dataset simulation, reconstruction, preset
// comparison and the circle-feasibility playground, all emitting deterministic
// seeded artifacts (PTYB1 bundles, trace CSVs, PGM renders).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ptycho/bundleio.hpp"
#include "ptycho/engine.hpp"
#include "ptycho/metrics.hpp"
#include "ptycho/simulate.hpp"
#include "ptycho/toygeom.hpp"

namespace {

using namespace ptycho;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;  // divergence or I/O failure
constexpr int kExitUsage = 2;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

MetricRegion parse_region(const std::string& text, int n) {
  int t, l, h, w;
  char c1, c2, c3;
  std::istringstream in(text);
  if (!(in >> t >> c1 >> l >> c2 >> h >> c3 >> w) || c1 != ',' || c2 != ',' || c3 != ',')
    throw std::invalid_argument("--region: expected top,left,height,width");
  MetricRegion region{t, l, h, w};
  region.validate(n);
  return region;
}

std::vector<toy::Circle> parse_circles(const std::string& text) {
  std::vector<toy::Circle> circles;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ';')) {
    if (item.empty()) continue;
    double x, y, r;
    char c1, c2;
    std::istringstream ci(item);
    if (!(ci >> x >> c1 >> y >> c2 >> r) || c1 != ',' || c2 != ',')
      throw std::invalid_argument("--circles: malformed circle spec '" + item +
                                  "' (expected cx,cy,radius)");
    if (!(r > 0.0)) throw std::invalid_argument("--circles: radius must be positive in '" + item + "'");
    circles.emplace_back(toy::PlanePoint{x, y}, r);
  }
  if (circles.empty()) throw std::invalid_argument("--circles: no circles given");
  return circles;
}

toy::PlanePoint parse_point(const std::string& text) {
  double x, y;
  char c;
  std::istringstream in(text);
  if (!(in >> x >> c >> y) || c != ',') throw std::invalid_argument("--start: expected x,y");
  return {x, y};
}

std::vector<PresetSpec> parse_presets(const std::string& text, double default_param) {
  std::vector<PresetSpec> specs;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    PresetSpec spec;
    const auto colon = item.find(':');
    const std::string name = item.substr(0, colon);
    spec.preset = parse_preset(name);
    if (spec.preset == Preset::custom)
      throw std::invalid_argument("--presets: custom is not usable in a preset list");
    const bool takes_param =
        spec.preset == Preset::raar || spec.preset == Preset::rrr || spec.preset == Preset::tlambda;
    if (colon != std::string::npos) {
      if (!takes_param)
        throw std::invalid_argument("--presets: " + name + " does not take a parameter");
      spec.parameter = std::stod(item.substr(colon + 1));
    } else if (takes_param) {
      spec.parameter = default_param;
    }
    specs.push_back(spec);
  }
  if (specs.empty()) throw std::invalid_argument("--presets: empty preset list");
  return specs;
}

struct InitFlags {
  bool from_truth = false;
  double probe_radius = -1.0;  // <=0: use 3/8 of the probe array side
  double probe_smooth = 0.0;
};

InitFlags resolve_init(InitFlags flags, int probe_size) {
  if (flags.probe_radius <= 0.0) flags.probe_radius = 0.375 * probe_size;
  return flags;
}

ProbeObjectPair make_init(const io::Bundle& bundle, const InitFlags& flags) {
  if (flags.from_truth) {
    if (!bundle.truth) throw std::invalid_argument("--init-truth: bundle carries no ground truth");
    return {bundle.truth->probe, bundle.truth->object};
  }
  ProbeObjectPair init;
  init.object = ComplexField(bundle.geom.object_size, bundle.geom.object_size, cdouble{1.0, 0.0});
  try {
    init.probe = make_probe(bundle.geom.probe_size, flags.probe_radius, flags.probe_smooth);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("--init-probe-radius: " + std::string(e.what()));
  }
  return init;
}

std::vector<std::string> common_comments(const std::string& tool, const std::string& bundle_path,
                                         const AlgoParams& params, int iters,
                                         const InitFlags& init_flags, const MetricRegion& region,
                                         bool has_truth) {
  std::vector<std::string> c;
  c.push_back("tool=ptycho " + tool);
  c.push_back("bundle=" + bundle_path);
  c.push_back("iters=" + std::to_string(iters) + " inner_iters=" + std::to_string(params.inner_iters) +
              " seed=" + std::to_string(params.seed));
  c.push_back("eps_frac=" + fmt(params.eps_frac) + " reg_frac=" + fmt(params.reg_frac) +
              " renorm=" + std::string(params.renorm ? "1" : "0"));
  if (init_flags.from_truth)
    c.push_back("init=truth");
  else
    c.push_back("init=unit-object+aperture-probe radius=" + fmt(init_flags.probe_radius) +
                " smooth=" + fmt(init_flags.probe_smooth));
  c.push_back("region=" + std::to_string(region.top) + "," + std::to_string(region.left) + "," +
              std::to_string(region.height) + "," + std::to_string(region.width));
  c.push_back("truth_metrics=" + std::string(has_truth ? "1" : "0"));
  return c;
}

int cmd_simulate(int object_size, double contrast, double phase_range, int cells,
                 const std::string& probe_config, int probe_size, double probe_radius,
                 double edge_smooth, int grid_rows, int grid_cols, int step, int jitter,
                 double photons, std::uint64_t seed, const std::string& out_path) {
  double radius = probe_radius;
  if (probe_config == "big") {
    radius = 20.0;
  } else if (probe_config == "small") {
    radius = 10.0;
  } else if (probe_config != "custom") {
    throw std::invalid_argument("--probe: expected big, small or custom");
  }
  if (probe_config == "custom" && radius <= 0.0)
    throw std::invalid_argument("--probe-radius: required with --probe custom");

  GroundTruth truth;
  truth.object = make_phantom(object_size, contrast, phase_range, cells, seed);
  truth.probe = make_probe(probe_size, radius, edge_smooth);
  const ScanGeometry geom = make_scan(grid_rows, grid_cols, step, jitter, probe_size, object_size, seed);
  const std::optional<double> budget =
      photons > 0.0 ? std::optional<double>(photons) : std::nullopt;
  const DiffractionStack stack = forward(truth, geom, budget, seed);

  io::BundleMeta meta;
  meta.seed = seed;
  meta.photons_per_pattern = budget;
  meta.probe_config = probe_config;
  io::write_bundle(out_path, stack, geom, &truth, meta);

  std::cout << "bundle: " << out_path << " positions=" << stack.count << " pattern=" << stack.size
            << "x" << stack.size << " object=" << object_size << "x" << object_size
            << " photons=" << (budget ? fmt(*budget) : std::string("none")) << " seed=" << seed
            << " probe=" << probe_config << "(radius=" << fmt(radius) << ")\n";
  return kExitOk;
}

int cmd_reconstruct(const std::string& in_path, const std::string& preset_name,
                    std::optional<double> param, AlgoParams params, int iters,
                    const InitFlags& init_flags, const std::string& region_text,
                    const std::string& out_prefix, bool timings) {
  const io::Bundle bundle = io::read_bundle(in_path);
  const bool sp_mode = preset_name == "sp";
  if (!sp_mode) {
    params.preset = parse_preset(preset_name);
    if (param) params.beta_or_lambda = *param;
  }
  params.iters = iters;

  const MetricRegion region = region_text.empty()
                                  ? central_region(bundle.geom.object_size)
                                  : parse_region(region_text, bundle.geom.object_size);
  const InitFlags init_resolved = resolve_init(init_flags, bundle.geom.probe_size);
  const ProbeObjectPair init = make_init(bundle, init_resolved);
  const GroundTruth* truth = bundle.truth ? &*bundle.truth : nullptr;

  RunResult result = sp_mode ? sp_run(bundle.stack, bundle.geom, init, params, truth, &region)
                             : run(bundle.stack, bundle.geom, init, params, truth, &region);

  auto comments = common_comments("reconstruct", in_path, params, iters, init_resolved, region,
                                  truth != nullptr);
  if (sp_mode) {
    comments.push_back("preset=sp order=" +
                       std::string(params.sp_order == SpOrder::shuffled ? "shuffled" : "fixed") +
                       " alpha_obj=" + fmt(params.sp_alpha_obj) +
                       " alpha_probe=" + fmt(params.sp_alpha_probe));
  } else {
    const AlgoParams resolved = resolve_preset(params);
    comments.push_back("preset=" + preset_name + " beta_or_lambda=" + fmt(params.beta_or_lambda) +
                       " a=" + fmt(resolved.a) + " b=" + fmt(resolved.b) + " c=" + fmt(resolved.c));
  }

  io::CsvOptions csv;
  csv.comments = std::move(comments);
  csv.include_timings = timings;
  io::write_trace_csv({result.trace}, out_prefix + "_trace.csv", csv);
  io::write_cf32(out_prefix + "_object.cf32", result.pair.object);
  io::write_cf32(out_prefix + "_probe.cf32", result.pair.probe);
  io::render_field(result.pair.object, io::RenderKind::modulus, out_prefix + "_object_modulus.pgm");
  io::render_field(result.pair.object, io::RenderKind::phase, out_prefix + "_object_phase.pgm");
  io::render_field(result.pair.probe, io::RenderKind::modulus, out_prefix + "_probe_modulus.pgm");
  io::render_field(result.pair.probe, io::RenderKind::phase, out_prefix + "_probe_phase.pgm");

  if (result.trace.status == RunStatus::diverged) {
    std::cerr << "diverged at iteration " << result.trace.diverged_at << "; partial trace written\n";
    return kExitRuntime;
  }
  const TraceRecord& last = result.trace.records.back();
  std::cout << "final: iter=" << last.iter << " data_error=" << fmt(last.data_error);
  if (last.object_nrmse) std::cout << " object_nrmse=" << fmt(*last.object_nrmse);
  std::cout << "\n";
  return kExitOk;
}

int cmd_compare(const std::string& in_path, const std::string& presets_text, AlgoParams params,
                int iters, const InitFlags& init_flags, const std::string& region_text,
                const std::string& out_path, bool timings, double default_param) {
  const io::Bundle bundle = io::read_bundle(in_path);
  const std::vector<PresetSpec> presets = parse_presets(presets_text, default_param);
  const MetricRegion region = region_text.empty()
                                  ? central_region(bundle.geom.object_size)
                                  : parse_region(region_text, bundle.geom.object_size);
  const InitFlags init_resolved = resolve_init(init_flags, bundle.geom.probe_size);
  const ProbeObjectPair init = make_init(bundle, init_resolved);
  const GroundTruth* truth = bundle.truth ? &*bundle.truth : nullptr;

  const std::vector<ErrorTrace> traces =
      compare(bundle.stack, bundle.geom, init, presets, iters, params, truth, &region);

  auto comments = common_comments("compare", in_path, params, iters, init_resolved, region,
                                  truth != nullptr);
  std::string names;
  for (const auto& spec : presets) names += (names.empty() ? "" : ",") + spec.label();
  comments.push_back("presets=" + names);

  io::CsvOptions csv;
  csv.comments = std::move(comments);
  csv.include_status = true;
  csv.include_timings = timings;
  io::write_trace_csv(traces, out_path, csv);

  bool any_diverged = false;
  for (const auto& trace : traces) {
    const std::string tail =
        trace.records.empty() ? "-" : fmt(trace.records.back().data_error);
    std::cout << trace.label << ": iters=" << trace.records.size() << " final_data_error=" << tail;
    if (!trace.records.empty() && trace.records.back().object_nrmse)
      std::cout << " final_object_nrmse=" << fmt(*trace.records.back().object_nrmse);
    if (trace.status == RunStatus::diverged) {
      std::cout << " DIVERGED@" << trace.diverged_at;
      any_diverged = true;
    }
    std::cout << "\n";
  }
  return any_diverged ? kExitRuntime : kExitOk;
}

int cmd_toy(const std::string& circles_text, const std::string& start_text,
            const std::string& algorithm, double beta, const std::string& relax_text, int iters,
            const std::string& order_text, std::uint64_t seed, const std::string& out_path,
            bool per_projection) {
  const std::vector<toy::Circle> circles = parse_circles(circles_text);
  const toy::PlanePoint start = parse_point(start_text);
  const toy::SweepOrder order =
      order_text == "shuffled" ? toy::SweepOrder::shuffled : toy::SweepOrder::fixed;
  if (order_text != "fixed" && order_text != "shuffled")
    throw std::invalid_argument("--order: expected fixed or shuffled");
  if (iters < 1) throw std::invalid_argument("--iters: must be >= 1");

  std::vector<double> relaxations(circles.size(), 1.0);
  if (!relax_text.empty()) {
    relaxations.clear();
    std::istringstream in(relax_text);
    std::string item;
    while (std::getline(in, item, ',')) relaxations.push_back(std::stod(item));
    if (relaxations.size() != circles.size())
      throw std::invalid_argument("--relax: need one relaxation per circle");
  }

  std::string out;
  out += "# tool=ptycho toy algorithm=" + algorithm + " order=" + order_text +
         " iters=" + std::to_string(iters) + " seed=" + std::to_string(seed) + "\n";
  out += "# circles=" + circles_text + " start=" + start_text + "\n";
  out += "sweep,component,x,y\n";
  char row[128];

  if (algorithm == "sp") {
    // the per-sweep iterate of a sequential cycle can settle even on
    // inconsistent sets; cycles live at per-projection granularity
    const auto sweeps = toy::sp_iterate(start, circles, order, relaxations, iters, seed,
                                        per_projection ? toy::TraceGranularity::per_projection
                                                       : toy::TraceGranularity::per_sweep);
    std::snprintf(row, sizeof row, "0,0,%.17g,%.17g\n", start.x, start.y);
    out += row;
    for (std::size_t k = 0; k < sweeps.size(); ++k) {
      std::snprintf(row, sizeof row, "%zu,0,%.17g,%.17g\n", k + 1, sweeps[k].x, sweeps[k].y);
      out += row;
    }
    const auto fine = toy::sp_iterate(start, circles, order, relaxations, iters, seed,
                                      toy::TraceGranularity::per_projection);
    const auto cycle = toy::detect_cycle(fine, std::min<int>(200, static_cast<int>(fine.size())), 1e-9);
    if (cycle)
      out += "# cycle_period=" + std::to_string(*cycle) + " (per-projection)\n";
    const toy::PlanePoint last = sweeps.empty() ? start : sweeps.back();
    std::snprintf(row, sizeof row, "# final_point=%.17g,%.17g\n", last.x, last.y);
    out += row;
  } else {
    Triple t;
    if (algorithm == "dc") {
      t = preset_params(Preset::dc);
    } else if (algorithm == "ar") {
      t = preset_params(Preset::ar);
    } else if (algorithm == "raar") {
      t = preset_params(Preset::raar, beta);
    } else {
      throw std::invalid_argument("--algorithm: expected sp, dc, ar or raar");
    }
    toy::ProductPoint x;
    x.components.assign(circles.size(), start);
    for (std::size_t i = 0; i < x.components.size(); ++i) {
      std::snprintf(row, sizeof row, "0,%zu,%.17g,%.17g\n", i, start.x, start.y);
      out += row;
    }
    double last_step = 0.0;
    for (int k = 1; k <= iters; ++k) {
      const toy::ProductPoint next = toy::abc_step(x, circles, t.a, t.b, t.c);
      last_step = toy::max_component_distance(next, x);
      x = next;
      for (std::size_t i = 0; i < x.components.size(); ++i) {
        std::snprintf(row, sizeof row, "%d,%zu,%.17g,%.17g\n", k, i, x.components[i].x,
                      x.components[i].y);
        out += row;
      }
    }
    toy::PlanePoint mean{0.0, 0.0};
    for (const auto& p : x.components) mean = mean + p;
    mean = (1.0 / static_cast<double>(x.components.size())) * mean;
    std::snprintf(row, sizeof row, "# final_point=%.17g,%.17g\n", mean.x, mean.y);
    out += row;
    std::snprintf(row, sizeof row, "# last_step=%.17g\n", last_step);
    out += row;
  }

  io::detail::write_file_atomic(out_path, out);
  std::cout << "trajectory: " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blind ptychography set-projection toolkit"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset bundle");
  int object_size = 160, cells = 12, probe_size = 64, grid_rows = 8, grid_cols = 8, step = 12,
      jitter = 2;
  double contrast = 0.4, phase_range = 1.0, probe_radius = 0.0, edge_smooth = 2.0, photons = 0.0;
  std::uint64_t sim_seed = 7;
  std::string probe_config = "big", sim_out = "dataset.ptyb";
  sim->add_option("--size", object_size, "object side length in pixels")->capture_default_str();
  sim->add_option("--contrast", contrast, "phantom amplitude contrast in [0,1]")->capture_default_str();
  sim->add_option("--phase-range", phase_range, "phantom phase range in radians")->capture_default_str();
  sim->add_option("--cells", cells, "phantom cell count")->capture_default_str();
  sim->add_option("--probe", probe_config, "probe config: big, small or custom")->capture_default_str();
  sim->add_option("--probe-size", probe_size, "probe array side M")->capture_default_str();
  sim->add_option("--probe-radius", probe_radius, "aperture radius for --probe custom");
  sim->add_option("--edge-smooth", edge_smooth, "aperture edge rolloff in pixels")->capture_default_str();
  sim->add_option("--grid", grid_rows, "scan grid rows (see --grid-cols)")->capture_default_str();
  sim->add_option("--grid-cols", grid_cols, "scan grid cols (default: same as --grid)");
  sim->add_option("--step", step, "scan step in pixels")->capture_default_str();
  sim->add_option("--jitter", jitter, "max per-axis integer jitter")->capture_default_str();
  sim->add_option("--photons", photons, "expected photons per pattern (0 = noiseless)")
      ->capture_default_str();
  sim->add_option("--seed", sim_seed, "simulation seed")->capture_default_str();
  sim->add_option("--out", sim_out, "output bundle directory")->capture_default_str();

  // shared reconstruction flags
  auto add_recon_flags = [](CLI::App* cmd, AlgoParams& params, InitFlags& init_flags,
                            std::string& region_text, bool& timings) {
    cmd->add_option("--inner-iters", params.inner_iters, "alternating least-squares rounds per concur")
        ->capture_default_str();
    cmd->add_option("--eps-frac", params.eps_frac, "dark-pixel threshold fraction")->capture_default_str();
    cmd->add_option("--reg-frac", params.reg_frac, "update regularization fraction")->capture_default_str();
    cmd->add_option("--seed", params.seed, "run seed")->capture_default_str();
    cmd->add_flag("--no-renorm", [&params](std::int64_t) { params.renorm = false; },
                  "keep the free probe/object scale unpinned");
    cmd->add_flag("--init-truth", init_flags.from_truth, "start from the bundled ground truth");
    cmd->add_option("--init-probe-radius", init_flags.probe_radius,
                    "aperture radius of the initial probe (default: 3/8 of the probe side)");
    cmd->add_option("--init-probe-smooth", init_flags.probe_smooth,
                    "edge rolloff of the default initial probe")
        ->capture_default_str();
    cmd->add_option("--region", region_text, "metric region top,left,height,width (default: central 50%)");
    cmd->add_flag("--timings", timings, "fill the elapsed_ms CSV column (breaks byte reproducibility)");
  };

  // reconstruct
  auto* rec = app.add_subcommand("reconstruct", "run one algorithm on a bundle");
  std::string rec_in, rec_preset = "raar", rec_region, rec_prefix = "recon";
  AlgoParams rec_params;
  InitFlags rec_init;
  int rec_iters = 300;
  bool rec_timings = false;
  double rec_param = -1.0;
  std::string rec_order = "fixed";
  rec->add_option("--in", rec_in, "input bundle directory")->required();
  rec->add_option("--preset", rec_preset,
                  "algorithm: dc, ar, dr, sf, raar, rrr, tlambda, custom or sp")
      ->capture_default_str();
  rec->add_option("--beta,--lambda", rec_param, "preset parameter (default 0.75)");
  rec->add_option("--a", rec_params.a, "custom relaxation a");
  rec->add_option("--b", rec_params.b, "custom relaxation b");
  rec->add_option("--c", rec_params.c, "custom relaxation c");
  rec->add_option("--iters", rec_iters, "iteration count")->capture_default_str();
  rec->add_option("--order", rec_order, "sp sweep order: fixed or shuffled")->capture_default_str();
  rec->add_option("--alpha-obj", rec_params.sp_alpha_obj, "sp object step size")->capture_default_str();
  rec->add_option("--alpha-probe", rec_params.sp_alpha_probe, "sp probe step size")
      ->capture_default_str();
  rec->add_option("--out-prefix", rec_prefix, "output file prefix")->capture_default_str();
  add_recon_flags(rec, rec_params, rec_init, rec_region, rec_timings);

  // compare
  auto* cmp = app.add_subcommand("compare", "run several presets from one init");
  std::string cmp_in, cmp_presets = "dc,ar,sf,raar:0.75,rrr:0.5,tlambda:0.75", cmp_region,
              cmp_out = "compare.csv";
  AlgoParams cmp_params;
  InitFlags cmp_init;
  int cmp_iters = 300;
  bool cmp_timings = false;
  cmp->add_option("--in", cmp_in, "input bundle directory")->required();
  cmp->add_option("--presets", cmp_presets, "comma list, parameter after ':'")->capture_default_str();
  cmp->add_option("--iters", cmp_iters, "iteration count")->capture_default_str();
  cmp->add_option("--out", cmp_out, "output CSV path")->capture_default_str();
  add_recon_flags(cmp, cmp_params, cmp_init, cmp_region, cmp_timings);

  // toy
  auto* toy_cmd = app.add_subcommand("toy", "circle-feasibility trajectories");
  std::string toy_circles = "1,0,1;0,1,1;-1,0,1", toy_start = "0.8,0.3", toy_algorithm = "sp",
              toy_relax, toy_order = "fixed", toy_out = "toy.csv";
  double toy_beta = 0.75;
  int toy_iters = 100;
  std::uint64_t toy_seed = 0;
  bool toy_fine = false;
  toy_cmd->add_option("--circles", toy_circles, "semicolon list of cx,cy,radius")->capture_default_str();
  toy_cmd->add_option("--start", toy_start, "initial point x,y")->capture_default_str();
  toy_cmd->add_option("--algorithm", toy_algorithm, "sp, dc, ar or raar")->capture_default_str();
  toy_cmd->add_option("--beta", toy_beta, "raar parameter")->capture_default_str();
  toy_cmd->add_option("--relax", toy_relax, "per-circle sp relaxations (default all 1)");
  toy_cmd->add_option("--order", toy_order, "sp sweep order: fixed or shuffled")->capture_default_str();
  toy_cmd->add_option("--iters", toy_iters, "sweep count")->capture_default_str();
  toy_cmd->add_option("--seed", toy_seed, "shuffle seed")->capture_default_str();
  toy_cmd->add_option("--out", toy_out, "output CSV path")->capture_default_str();
  toy_cmd->add_flag("--per-projection", toy_fine, "emit every intermediate projection");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sim->parsed()) {
      if (!sim->count("--grid-cols")) grid_cols = grid_rows;
      return cmd_simulate(object_size, contrast, phase_range, cells, probe_config, probe_size,
                          probe_radius, edge_smooth, grid_rows, grid_cols, step, jitter, photons,
                          sim_seed, sim_out);
    }
    if (rec->parsed()) {
      rec_params.sp_order = rec_order == "shuffled" ? SpOrder::shuffled : SpOrder::fixed;
      if (rec_order != "fixed" && rec_order != "shuffled")
        throw std::invalid_argument("--order: expected fixed or shuffled");
      if (rec_preset == "custom" && !(rec->count("--a") && rec->count("--b") && rec->count("--c")))
        throw std::invalid_argument("--preset custom requires --a, --b and --c");
      const std::optional<double> param =
          rec->count("--beta") ? std::optional<double>(rec_param) : std::nullopt;
      return cmd_reconstruct(rec_in, rec_preset, param, rec_params, rec_iters, rec_init, rec_region,
                             rec_prefix, rec_timings);
    }
    if (cmp->parsed()) {
      return cmd_compare(cmp_in, cmp_presets, cmp_params, cmp_iters, cmp_init, cmp_region, cmp_out,
                         cmp_timings, 0.75);
    }
    if (toy_cmd->parsed()) {
      return cmd_toy(toy_circles, toy_start, toy_algorithm, toy_beta, toy_relax, toy_iters,
                     toy_order, toy_seed, toy_out, toy_fine);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

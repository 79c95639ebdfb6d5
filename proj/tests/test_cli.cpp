#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

fs::path work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "ptycho_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path log = work_dir() / ("log_" + std::to_string(counter++) + ".txt");
  const std::string cmd = std::string(PTYCHO_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  result.output.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  return result;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// small, fast dataset shared by the reconstruction tests
fs::path small_bundle() {
  static const fs::path dir = [] {
    const fs::path d = work_dir() / "small.ptyb";
    const CliResult r = run_cli(
        "simulate --size 96 --cells 8 --probe custom --probe-size 32 --probe-radius 12 "
        "--grid 4 --step 10 --jitter 2 --seed 7 --out " + d.string());
    REQUIRE(r.exit_code == 0);
    return d;
  }();
  return dir;
}

int count_lines_starting(const std::string& text, const std::string& prefix) {
  int n = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) break;
    if (text.compare(pos, prefix.size(), prefix) == 0) ++n;
    pos = end + 1;
  }
  return n;
}

}  // namespace

TEST_CASE("simulate") {
  SECTION("identical flags give identical bundles") {
    const fs::path a = work_dir() / "det_a.ptyb";
    const fs::path b = work_dir() / "det_b.ptyb";
    const std::string flags =
        "simulate --size 96 --probe custom --probe-size 32 --probe-radius 10 --grid 3 "
        "--step 12 --jitter 2 --photons 1e5 --seed 11 --out ";
    REQUIRE(run_cli(flags + a.string()).exit_code == 0);
    REQUIRE(run_cli(flags + b.string()).exit_code == 0);
    for (const char* name :
         {"manifest.json", "patterns.f32", "positions.i32", "truth_object.cf32", "truth_probe.cf32"})
      CHECK(slurp(a / name) == slurp(b / name));
  }
  SECTION("an oversized probe radius is a usage error naming the flag") {
    const CliResult r = run_cli(
        "simulate --probe custom --probe-size 32 --probe-radius 20 --size 96 --grid 3 --step 10 "
        "--out " + (work_dir() / "bad.ptyb").string());
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("radius") != std::string::npos);
  }
  SECTION("the default flags produce a readable bundle") {
    const fs::path out = work_dir() / "default.ptyb";
    const CliResult r = run_cli("simulate --out " + out.string());
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("positions=64") != std::string::npos);
    CHECK(fs::exists(out / "manifest.json"));
    CHECK(fs::exists(out / "patterns.f32"));
  }
}

TEST_CASE("reconstruct") {
  const fs::path bundle = small_bundle();

  SECTION("one iteration gives a header plus one row") {
    const fs::path prefix = work_dir() / "r1";
    const CliResult r = run_cli("reconstruct --in " + bundle.string() +
                                " --preset dc --iters 1 --out-prefix " + prefix.string());
    REQUIRE(r.exit_code == 0);
    const std::string csv = slurp(prefix.string() + "_trace.csv");
    CHECK(count_lines_starting(csv, "preset,iter,") == 1);
    CHECK(count_lines_starting(csv, "dc,") == 1);
    CHECK(fs::exists(prefix.string() + "_object.cf32"));
    CHECK(fs::exists(prefix.string() + "_object_modulus.pgm"));
    CHECK(fs::exists(prefix.string() + "_probe_phase.pgm"));
  }
  SECTION("raar without --beta echoes the 0.75 default in the header comments") {
    const fs::path prefix = work_dir() / "r2";
    const CliResult r = run_cli("reconstruct --in " + bundle.string() +
                                " --preset raar --iters 2 --out-prefix " + prefix.string());
    REQUIRE(r.exit_code == 0);
    const std::string csv = slurp(prefix.string() + "_trace.csv");
    CHECK(csv.find("# preset=raar beta_or_lambda=0.75") != std::string::npos);
    CHECK(csv.find("b=1.5") != std::string::npos);
  }
  SECTION("a truth-initialized run on noiseless data reports a tiny data error") {
    const fs::path prefix = work_dir() / "r3";
    // bundles store intensities and truth as float32, which floors the
    // residual near 2e-8; 1e-7 is the quantization envelope for this path
    // (the in-memory fixed-point bound of 1e-8 is checked in the acceptance suite)
    const CliResult r = run_cli("reconstruct --in " + bundle.string() +
                                " --preset raar --iters 3 --init-truth --reg-frac 1e-12 "
                                "--out-prefix " + prefix.string());
    REQUIRE(r.exit_code == 0);
    const std::string csv = slurp(prefix.string() + "_trace.csv");
    // every recorded data_error must stay at the fixed point
    std::istringstream lines(csv);
    std::string line;
    int rows = 0;
    while (std::getline(lines, line)) {
      if (line.starts_with("raar,")) {
        ++rows;
        const auto c1 = line.find(',', 0);
        const auto c2 = line.find(',', c1 + 1);
        const auto c3 = line.find(',', c2 + 1);
        CHECK(std::stod(line.substr(c2 + 1, c3 - c2 - 1)) <= 1e-7);
      }
    }
    CHECK(rows == 3);
  }
  SECTION("unknown presets are usage errors listing the valid names") {
    const CliResult r = run_cli("reconstruct --in " + bundle.string() +
                                " --preset nonsense --out-prefix " + (work_dir() / "x").string());
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("valid: dc, ar, dr, sf, raar, rrr, tlambda") != std::string::npos);
  }
  SECTION("sp mode runs and writes a trace") {
    const fs::path prefix = work_dir() / "r4";
    const CliResult r = run_cli("reconstruct --in " + bundle.string() +
                                " --preset sp --order shuffled --iters 2 --seed 5 --out-prefix " +
                                prefix.string());
    REQUIRE(r.exit_code == 0);
    const std::string csv = slurp(prefix.string() + "_trace.csv");
    CHECK(count_lines_starting(csv, "sp,") == 2);
    CHECK(csv.find("# preset=sp order=shuffled") != std::string::npos);
  }
}

TEST_CASE("compare") {
  const fs::path bundle = small_bundle();

  SECTION("six presets give six groups and reruns are byte-identical") {
    const fs::path a = work_dir() / "cmp_a.csv";
    const fs::path b = work_dir() / "cmp_b.csv";
    const std::string flags = "compare --in " + bundle.string() +
                              " --presets dc,ar,sf,raar:0.75,rrr:0.5,tlambda:0.75 --iters 3 "
                              "--seed 7 --out ";
    REQUIRE(run_cli(flags + a.string()).exit_code == 0);
    REQUIRE(run_cli(flags + b.string()).exit_code == 0);
    const std::string csv = slurp(a);
    CHECK(slurp(b) == csv);
    CHECK(count_lines_starting(csv, "dc,") == 3);
    CHECK(count_lines_starting(csv, "ar,") == 3);
    CHECK(count_lines_starting(csv, "sf,") == 3);
    CHECK(count_lines_starting(csv, "raar:0.75,") == 3);
    CHECK(count_lines_starting(csv, "rrr:0.5,") == 3);
    CHECK(count_lines_starting(csv, "tlambda:0.75,") == 3);
    CHECK(csv.find(",status") != std::string::npos);
  }
  SECTION("bad preset lists are usage errors") {
    const CliResult r = run_cli("compare --in " + bundle.string() + " --presets dc,banana --out " +
                                (work_dir() / "bad.csv").string());
    CHECK(r.exit_code == 2);
  }
}

TEST_CASE("toy") {
  SECTION("a single circle settles after the first sweep") {
    const fs::path out = work_dir() / "toy1.csv";
    const CliResult r = run_cli("toy --circles 0,0,1 --start 2.5,1.5 --algorithm sp --iters 5 --out " +
                                out.string());
    REQUIRE(r.exit_code == 0);
    const std::string csv = slurp(out);
    std::istringstream lines(csv);
    std::string line, first_sweep;
    while (std::getline(lines, line)) {
      if (line.starts_with("1,0,")) first_sweep = line.substr(2);
      if (line.starts_with("5,0,")) CHECK(line.substr(2) == first_sweep);
    }
    CHECK(!first_sweep.empty());
  }
  SECTION("divide-and-concur finds a common point of intersecting circles") {
    const fs::path out = work_dir() / "toy2.csv";
    // all three circles pass through the origin, transversally
    const CliResult r = run_cli(
        "toy --circles \"2,0,2;0,2,2;-1.2,-0.9,1.5\" --start 0.4,0.3 --algorithm dc --iters 800 "
        "--out " + out.string());
    REQUIRE(r.exit_code == 0);
    const std::string csv = slurp(out);
    const auto at = csv.find("# final_point=");
    REQUIRE(at != std::string::npos);
    double x = 0.0, y = 0.0;
    REQUIRE(std::sscanf(csv.c_str() + at, "# final_point=%lf,%lf", &x, &y) == 2);
    CHECK(std::hypot(x, y) < 1e-8);
  }
  SECTION("disjoint circles under sp cycle and say so") {
    const fs::path out = work_dir() / "toy3.csv";
    const CliResult r = run_cli(
        "toy --circles \"0,0,1;10,0,1\" --start 4,3 --algorithm sp --iters 300 --out " + out.string());
    REQUIRE(r.exit_code == 0);
    const std::string csv = slurp(out);
    CHECK(csv.find("# cycle_period=2") != std::string::npos);
  }
  SECTION("malformed circle specs are usage errors") {
    const CliResult r = run_cli("toy --circles 1,2 --out " + (work_dir() / "bad.csv").string());
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("circle") != std::string::npos);
  }
}

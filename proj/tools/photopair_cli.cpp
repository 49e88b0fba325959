#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "photopair/errors.hpp"
#include "photopair/oracle.hpp"
#include "photopair/runner.hpp"

namespace pr = photopair::runner;

namespace {

int run_command(const std::string& config_path, const std::string& scan_override, int points, const std::string& out,
                const std::string& json_out, int threads) {
  auto raw = [&] {
    std::ifstream in(config_path);
    if (!in) throw photopair::ConfigError("cannot open config file '" + config_path + "'");
    return pr::parse_config(in);
  }();
  if (!scan_override.empty()) {
    raw.values["scan.variable"] = scan_override;
    raw.lines.erase("scan.variable");
  }
  if (points > 0) {
    raw.values["scan.points"] = std::to_string(points);
    raw.lines.erase("scan.points");
  }
  const auto scenario = pr::resolve(raw);
  const auto result = pr::run_scan(scenario, threads);
  if (out.empty() || out == "-") {
    std::cout << pr::to_csv(result);
    if (!json_out.empty()) pr::write_output(result, "/dev/null", json_out);
  } else {
    pr::write_output(result, out, json_out);
  }
  std::fprintf(stderr, "%zu rows, normalization %.6g\n", result.rows.size(), result.normalization);
  return 0;
}

int oracle_command(int order, double coupling, double t_final, double dt, const std::string& out) {
  namespace po = photopair::oracle;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(5, 5);
  rho(2, 2) = 1.0;
  const auto system = po::TruncatedSystem::hydrogen_cascade(rho, coupling);
  const auto history = po::propagate(system, order, t_final, dt);
  const auto scheme = photopair::cascade::CascadeScheme::hydrogen_4d_3p_1s();
  const double deviation = po::cascade_deviation(history, scheme);
  std::printf("basis states: %zu\n", system.basis_size());
  std::printf("order: %d  t_final: %g fs  dt: %g fs  coupling: %g\n", order, t_final, dt, coupling);
  std::printf("norm: %.15f\n", history.norm());
  std::printf("max relative deviation from factorized cascade: %.3e\n", deviation);
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot open '" + out + "' for writing");
    f << "mode1,mode2,oracle,cascade\n";
    char buf[160];
    for (std::size_t i = 0; i < system.modes[0].size(); ++i)
      for (std::size_t j = 0; j < system.modes[1].size(); ++j) {
        const auto& m1 = system.modes[0][i];
        const auto& m2 = system.modes[1][j];
        double c = 0.0;
        try {
          c = photopair::cascade::coincidence_probability(rho, scheme, photopair::cascade::DetectorSpec::from_mode(m1),
                                                          photopair::cascade::DetectorSpec::from_mode(m2));
        } catch (const photopair::ChannelError&) {
        }
        std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g\n", i, j, po::extract_coincidence(history, m1, m2), c);
        f << buf;
      }
    if (!f) throw std::runtime_error("failed writing '" + out + "'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coherent control of photon-pair emission by photoelectron impact excitation"};
  app.require_subcommand(1);

  std::string config, scan, out, json_out;
  int points = 0, threads = 1;
  auto* run = app.add_subcommand("run", "Run a scan and write CSV (and optional JSON metadata)");
  run->add_option("--config", config, "Scenario file")->required();
  run->add_option("--scan", scan, "Override scan variable (relative_phase, pump_probe_delay, detector1_theta)");
  run->add_option("--points", points, "Override the number of scan points")->check(CLI::PositiveNumber);
  run->add_option("--out", out, "CSV output path (default stdout)");
  run->add_option("--json-out", json_out, "JSON metadata path");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  int order = 6;
  double coupling = 1e-4, t_final = 20.0, dt = 0.05;
  std::string oracle_out;
  auto* orc = app.add_subcommand("oracle", "Truncated-propagator check of the hydrogen cascade from 4d(m=0)");
  orc->add_option("--order", order, "Perturbative order")->check(CLI::PositiveNumber);
  orc->add_option("--coupling", coupling, "Coupling scale (fs^-1 per unit emission amplitude)");
  orc->add_option("--t-final", t_final, "Propagation time (fs)");
  orc->add_option("--dt", dt, "Time step (fs)");
  orc->add_option("--out", oracle_out, "CSV of per-pair probabilities");

  std::string show;
  auto* pre = app.add_subcommand("presets", "List built-in presets or print one in resolved form");
  pre->add_option("--show", show, "Preset name to print");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return run_command(config, scan, points, out, json_out, threads);
    if (*orc) return oracle_command(order, coupling, t_final, dt, oracle_out);
    if (*pre) {
      if (show.empty()) {
        for (const auto& n : pr::preset_names()) std::cout << n << "\n";
      } else {
        std::cout << pr::dump(pr::load_config_string("preset = " + show));
      }
      return 0;
    }
  } catch (const photopair::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

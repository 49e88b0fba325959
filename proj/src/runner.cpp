#include "photopair/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "json.hpp"

#include "photopair/constants.hpp"
#include "photopair/errors.hpp"

namespace photopair::runner {

namespace {

template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

// Runs body(i) for i in [0, n) on `threads` workers; rethrows the exception of
// the lowest failing index.
template <class F>
void parallel_for(std::size_t n, int threads, F&& body) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto count = static_cast<std::size_t>(std::max(1, threads));
  if (count == 1 || n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(count, n); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ScanPipeline::ScanPipeline(const Scenario& scenario, int threads)
    : scenario_(scenario),
      atom_(atoms::calcium_model()),
      grid_(ionization::EnergyGrid::centered(scenario.energy_center, scenario.energy_halfwidth, scenario.energy_points)) {
  std::size_t max_steps = 0;
  for (const auto& p : scenario_.pathways) max_steps = std::max(max_steps, p.steps.size());
  channels_ = ionization::channels_up_to(atom_.ground.l + static_cast<int>(max_steps));
  kernel_ = staged("collision", [&] {
    return std::make_unique<collision::CollisionKernel>(grid_, channels_, scenario_.target, scenario_.geometry,
                                                        scenario_.quadrature, collision::CollisionKernel::Route::Auto,
                                                        threads);
  });
  scheme_ = staged("cascade", [&] { return scenario_.cascade_scheme(); });
  thetas_ = scenario_.scan.thetas();
  detector_kernels_ = staged("cascade", [&] {
    std::vector<Eigen::MatrixXcd> k;
    for (double th : thetas_) k.push_back(kernel_for(th));
    return k;
  });
}

Eigen::MatrixXcd ScanPipeline::kernel_for(double theta) const {
  DetectorConfig d1 = scenario_.detector1;
  d1.theta = theta;
  return cascade::coincidence_kernel(scheme_, d1.spec(scheme_.first_photon_energy()),
                                     scenario_.detector2.spec(scheme_.second_photon_energy()));
}

std::vector<ionization::PathwaySpec> ScanPipeline::pathways_at(double v) const {
  return staged("field", [&] {
    Scenario s = scenario_;
    if (s.scan.variable == ScanVariable::RelativePhase) s.field.component(s.scan.control).phase = v;
    auto specs = s.pathway_specs();
    if (s.scan.variable == ScanVariable::PumpProbeDelay) specs = ionization::apply_pump_probe_delay(specs, v);
    return specs;
  });
}

ionization::PhotoelectronWavePacket ScanPipeline::wavepacket_at(double v) const {
  const auto specs = pathways_at(v);
  return staged("ionization", [&] {
    std::vector<ionization::PhotoelectronWavePacket> packets;
    for (const auto& p : specs) packets.push_back(ionization::pathway_wavepacket(atom_, p, grid_, channels_));
    return ionization::combine_pathways(packets);
  });
}

Eigen::MatrixXcd ScanPipeline::density_at(double v) const {
  const auto packet = wavepacket_at(v);
  return staged("collision", [&] { return kernel_->unnormalized(packet); });
}

double ScanPipeline::probability(const Eigen::MatrixXcd& rho, double theta) const {
  for (std::size_t i = 0; i < thetas_.size(); ++i)
    if (thetas_[i] == theta) return rho.cwiseProduct(detector_kernels_[i]).sum().real();
  return staged("cascade", [&] { return rho.cwiseProduct(kernel_for(theta)).sum().real(); });
}

ScanResult run_scan(const Scenario& scenario, int threads) {
  const ScanPipeline pipeline(scenario, threads);
  const auto values = scenario.scan.values();
  const bool theta_scan = scenario.scan.variable == ScanVariable::Detector1Theta;
  const auto thetas = theta_scan ? std::vector<double>{} : scenario.scan.thetas();

  ScanResult result;
  result.scan_variable = to_string(scenario.scan.variable);
  result.preset = scenario.preset;
  result.timestamp = utc_timestamp();
  result.config = resolved_entries(scenario);

  if (theta_scan) {
    const Eigen::MatrixXcd rho = pipeline.density_at(0.0);
    result.rows.resize(values.size());
    parallel_for(values.size(), threads, [&](std::size_t i) {
      result.rows[i] = {values[i], values[i], pipeline.probability(rho, values[i])};
    });
  } else {
    result.rows.resize(values.size() * thetas.size());
    parallel_for(values.size(), threads, [&](std::size_t i) {
      const Eigen::MatrixXcd rho = pipeline.density_at(values[i]);
      for (std::size_t j = 0; j < thetas.size(); ++j) {
        result.rows[i * thetas.size() + j] = {values[i], thetas[j], pipeline.probability(rho, thetas[j])};
      }
    });
  }

  double peak = 0.0;
  for (const auto& r : result.rows) peak = std::max(peak, r.probability);
  if (!(peak > 0.0)) throw StageError("normalize", "every coincidence probability in the scan is zero");
  result.normalization = peak;
  for (auto& r : result.rows) r.probability = std::max(0.0, r.probability / peak);
  return result;
}

std::string to_csv(const ScanResult& result) {
  std::string out = "scan_var,theta_k1_rad,probability\n";
  char buf[128];
  for (const auto& r : result.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r.scan_value, r.theta, r.probability);
    out += buf;
  }
  return out;
}

std::string to_json(const ScanResult& result) {
  nlohmann::ordered_json j;
  j["version"] = result.version;
  j["timestamp"] = result.timestamp;
  j["preset"] = result.preset;
  j["scan_variable"] = result.scan_variable;
  j["normalization"] = result.normalization;
  j["rows"] = result.rows.size();
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : result.config) cfg[k] = v;
  j["config"] = cfg;
  return j.dump(2) + "\n";
}

void write_output(const ScanResult& result, const std::string& csv_path, const std::string& json_path) {
  auto write = [](const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
  };
  write(csv_path, to_csv(result));
  if (!json_path.empty()) write(json_path, to_json(result));
}

SinusoidFit fit_sinusoid(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw std::invalid_argument("sinusoid fit needs at least three points");
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    a.row(i) << 1.0, std::cos(xi), std::sin(xi);
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d p = a.colPivHouseholderQr().solve(b);
  SinusoidFit f;
  f.a = p(0);
  f.b = std::hypot(p(1), p(2));
  f.c = std::atan2(-p(2), p(1));
  const double norm = b.norm();
  f.relative_residual = norm > 0.0 ? (a * p - b).norm() / norm : 0.0;
  return f;
}

double dominant_period(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 4) throw std::invalid_argument("period detection needs at least four samples");
  const std::size_t n = t.size();
  const double span = t.back() - t.front();
  const double dt = span / static_cast<double>(n - 1);
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double hann = 0.5 - 0.5 * std::cos(2.0 * constants::pi * static_cast<double>(i) / static_cast<double>(n - 1));
    w[i] = hann * (y[i] - mean);
  }
  auto power = [&](double f) {
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * std::polar(1.0, -2.0 * constants::pi * f * (t[i] - t.front()));
    return std::norm(s);
  };
  const double f_lo = 1.0 / span, f_hi = 0.5 / dt;
  const int grid = 20000;
  double best_f = f_lo, best_p = -1.0;
  for (int k = 0; k <= grid; ++k) {
    const double f = f_lo + (f_hi - f_lo) * k / grid;
    const double p = power(f);
    if (p > best_p) {
      best_p = p;
      best_f = f;
    }
  }
  // Golden-section refinement around the grid maximum.
  const double step = (f_hi - f_lo) / grid;
  double a = best_f - step, b = best_f + step;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 60; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (power(c) > power(d)) b = d; else a = c;
  }
  return 1.0 / (0.5 * (a + b));
}

}  // namespace photopair::runner

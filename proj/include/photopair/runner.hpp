#pragma once

// Scan execution: field -> photoelectron wave packet -> target density matrix
// -> coincidence probability over the detector-1 polar grid.

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "photopair/config.hpp"

namespace photopair::runner {

inline constexpr const char* kVersion = "1.0.0";

struct ScanRow {
  double scan_value = 0.0;
  double theta = 0.0;
  double probability = 0.0;
};

struct ScanResult {
  std::string scan_variable;
  std::string preset;
  std::string version = kVersion;
  std::string timestamp;
  double normalization = 0.0;  // raw maximum divided out of every row
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<ScanRow> rows;  // scan-major, theta-minor
};

/// Unnormalized density matrix of the target for one scan value. Stage errors
/// are rethrown as StageError tagged with the failing stage.
class ScanPipeline {
 public:
  explicit ScanPipeline(const Scenario& scenario, int threads = 1);

  /// Field with the scan variable applied (phase of the control component or
  /// pump-probe delay); identity for theta scans.
  std::vector<ionization::PathwaySpec> pathways_at(double scan_value) const;
  ionization::PhotoelectronWavePacket wavepacket_at(double scan_value) const;
  Eigen::MatrixXcd density_at(double scan_value) const;
  /// Raw coincidence probability at detector-1 polar angle `theta`.
  double probability(const Eigen::MatrixXcd& rho, double theta) const;

  const Scenario& scenario() const noexcept { return scenario_; }
  const collision::CollisionKernel& kernel() const noexcept { return *kernel_; }

 private:
  Scenario scenario_;
  atoms::AtomModel atom_;
  ionization::EnergyGrid grid_;
  std::vector<angular::AngularQuantumNumbers> channels_;
  std::unique_ptr<collision::CollisionKernel> kernel_;
  cascade::CascadeScheme scheme_;
  std::vector<double> thetas_;
  std::vector<Eigen::MatrixXcd> detector_kernels_;  // per theta in thetas_
  Eigen::MatrixXcd kernel_for(double theta) const;
};

/// Runs every grid point (concurrently when threads > 1) and normalizes the
/// scan to unit maximum. Throws StageError("normalize") when every probability is 0.
ScanResult run_scan(const Scenario& scenario, int threads = 1);

std::string to_csv(const ScanResult& result);
std::string to_json(const ScanResult& result);
/// Throws std::runtime_error on I/O failure; empty json_path skips the sidecar.
void write_output(const ScanResult& result, const std::string& csv_path, const std::string& json_path);

/// Least-squares fit of a + b cos(x + c); returns the relative RMS residual
/// (residual norm over data norm) and the fitted (a, b, c).
struct SinusoidFit {
  double a = 0.0, b = 0.0, c = 0.0;
  double relative_residual = 0.0;
};
SinusoidFit fit_sinusoid(const std::vector<double>& x, const std::vector<double>& y);

/// Period of the dominant non-constant Fourier component of uniformly sampled
/// data (Hann window, zero mean, DTFT peak refined on a fine frequency grid).
double dominant_period(const std::vector<double>& t, const std::vector<double>& y);

}  // namespace photopair::runner

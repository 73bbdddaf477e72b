#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "noonsim/fringe.hpp"
#include "noonsim/posterior.hpp"
#include "noonsim/schedule.hpp"

namespace noonsim {

/// Phase uncertainty reachable with N_T uncorrelated particles: 1/sqrt(N_T).
double shot_noise_limit(double n_total);

/// Quantum-mechanical floor for N_T resources: 1/N_T.
double heisenberg_limit(double n_total);

/// Sensitivity gain over shot noise in decibels:
///   gain = 10 * log10( shot_noise_limit(N_T) / delta_theta ).
/// Note the 10*log10 (amplitude-ratio) convention; many references use
/// 20*log10 instead.
double gain_db(double delta_theta, double n_total);

enum class Baseline { shot_noise, heisenberg };

/// One sensitivity record: achieved width and its gain over the chosen
/// baseline at the same resource count.
struct SensitivityReport {
    std::int64_t n_total = 0;
    double delta_theta = 0.0;
    double gain_db = 0.0;
    Baseline baseline = Baseline::shot_noise;
};

SensitivityReport make_sensitivity_report(std::int64_t n_total, double delta_theta,
                                          Baseline baseline = Baseline::shot_noise);

/// Closed-form Gaussian-approximation widths per schedule family.
/// All return the predicted 68.27% half-width in radians.
double gaussian_arithmetic_width(double n_tilde, double n_total);
double gaussian_geometric_width(double n_total);
double gaussian_ion_width(double n_p, double m_replicas);
double fixed_n_width(double n_tilde, double n_total);
double replicated_geometric_width(double n_p, double n_total);

enum class PredictionFamily {
    arithmetic,            // (9/2)^(1/4) / (nt^(1/4) N_T^(3/4))
    geometric,             // sqrt(6) / N_T  (ratio-2, single shot)
    ion,                   // (9/8)^(1/4) / (N_p^(3/4) sqrt(M))
    fixed_n,               // 1 / (sqrt(nt) sqrt(N_T))
    geometric_replicated,  // 2.55 / (sqrt(N_p) sqrt(N_T))
};

struct PredictionParams {
    double n_total = 0.0;
    double n_tilde = 1.0;
    double n_p = 0.0;
    double m_replicas = 1.0;
};

/// Dispatcher over the closed forms above; unknown families are an error.
double gaussian_prediction(PredictionFamily family, const PredictionParams& params);

/// Fixed-exponent power-law fit: least squares of
///   log delta_theta = log c - alpha * log N_T
/// over the supplied points.  Saturated widths must be filtered out by the
/// caller; they reflect the prior, not the protocol.
struct ScalingFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    double residual = 0.0;  // rms in log space
};

/// points are (N_T, delta_theta) pairs; needs >= 2 points with pairwise
/// distinct N_T and positive widths.
ScalingFit fit_prefactor(std::span<const std::pair<double, double>> points, double exponent);

/// Deterministic all-yes run: the posterior a schedule produces at theta = 0,
/// where every measurement yields "yes" with certainty under ideal models.
struct WidthPoint {
    std::int64_t n_total = 0;
    double half_width = 0.0;
    bool saturated = false;
};

/// grid_points = 0 selects default_grid_points(total particles).
WidthPoint all_yes_width(const Schedule& schedule, std::size_t grid_points = 0);

/// Sensitivity versus replica count for geometric schedules of ratio r at
/// theta = 0.  The comparison metric is half_width * N_T (sensitivity
/// normalized by total resources); `optimal` marks the arg-min row per r.
struct ReplicaSweepRow {
    std::int64_t r = 0;
    std::int64_t m = 0;
    std::int64_t p = 0;
    std::int64_t n_total = 0;
    double half_width = 0.0;
    double width_times_n = 0.0;
    bool optimal = false;
};

/// p_for_r supplies the sequence length per ratio (matched by index to
/// r_values); grid_points = 0 sizes the grid for the largest N_T of each row
/// family.  Deterministic: no sampling is involved.
std::vector<ReplicaSweepRow> fig_m_sweep(std::span<const std::int64_t> r_values,
                                         std::int64_t m_min, std::int64_t m_max,
                                         std::span<const std::int64_t> p_for_r,
                                         std::size_t grid_points = 0);

/// Large-M gain scan across true phases for one schedule.
struct GainScanRow {
    double theta = 0.0;
    double half_width = 0.0;
    double gain_db = 0.0;
    bool saturated = false;
};

struct GainScanResult {
    std::vector<GainScanRow> rows;
    /// Phase prior bound pi / gcd(cat sizes) beyond which estimation is
    /// ambiguous even in principle.
    double prior_bound = 0.0;
    /// Effective resource count total_particles * m_asymptotic used for the
    /// shot-noise reference.
    double n_total_effective = 0.0;
};

/// For each theta, builds the asymptotic-M posterior with the schedule's
/// models (replica counts scaled by m_asymptotic), extracts the folded
/// confidence half-width, and reports the dB gain over shot noise.
GainScanResult gain_scan(const Schedule& schedule, const ModelSource& source,
                         std::span<const double> thetas, double m_asymptotic, double prior_l,
                         std::size_t grid_points);

}  // namespace noonsim

#include "noonsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

#include "parallel_for.hpp"

namespace noonsim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Numerically calibrated prefactor of the ratio-2 replicated protocol; the
// single-shot Gaussian approximation gives sqrt(6) ~= 2.449 for the same
// scaling.
constexpr double kGeometricPrefactor = 2.55;

void require_n_total(double n_total) {
    if (!(n_total >= 1.0)) {
        throw Error("sensitivity baselines require n_total >= 1");
    }
}

}  // namespace

double shot_noise_limit(double n_total) {
    require_n_total(n_total);
    return 1.0 / std::sqrt(n_total);
}

double heisenberg_limit(double n_total) {
    require_n_total(n_total);
    return 1.0 / n_total;
}

double gain_db(double delta_theta, double n_total) {
    if (!(delta_theta > 0.0)) {
        throw Error("gain requires delta_theta > 0");
    }
    return 10.0 * std::log10(shot_noise_limit(n_total) / delta_theta);
}

SensitivityReport make_sensitivity_report(std::int64_t n_total, double delta_theta,
                                          Baseline baseline) {
    if (!(delta_theta > 0.0)) {
        throw Error("sensitivity report requires delta_theta > 0");
    }
    const auto n = static_cast<double>(n_total);
    const double reference =
        baseline == Baseline::shot_noise ? shot_noise_limit(n) : heisenberg_limit(n);
    return {n_total, delta_theta, 10.0 * std::log10(reference / delta_theta), baseline};
}

double gaussian_arithmetic_width(double n_tilde, double n_total) {
    return std::pow(4.5, 0.25) / (std::pow(n_tilde, 0.25) * std::pow(n_total, 0.75));
}

double gaussian_geometric_width(double n_total) {
    return std::sqrt(6.0) / n_total;
}

double gaussian_ion_width(double n_p, double m_replicas) {
    return std::pow(9.0 / 8.0, 0.25) / (std::pow(n_p, 0.75) * std::sqrt(m_replicas));
}

double fixed_n_width(double n_tilde, double n_total) {
    return 1.0 / (std::sqrt(n_tilde) * std::sqrt(n_total));
}

double replicated_geometric_width(double n_p, double n_total) {
    return kGeometricPrefactor / (std::sqrt(n_p) * std::sqrt(n_total));
}

double gaussian_prediction(PredictionFamily family, const PredictionParams& params) {
    switch (family) {
        case PredictionFamily::arithmetic:
            return gaussian_arithmetic_width(params.n_tilde, params.n_total);
        case PredictionFamily::geometric:
            return gaussian_geometric_width(params.n_total);
        case PredictionFamily::ion:
            return gaussian_ion_width(params.n_p, params.m_replicas);
        case PredictionFamily::fixed_n:
            return fixed_n_width(params.n_tilde, params.n_total);
        case PredictionFamily::geometric_replicated:
            return replicated_geometric_width(params.n_p, params.n_total);
    }
    throw Error("unknown prediction family");
}

ScalingFit fit_prefactor(std::span<const std::pair<double, double>> points, double exponent) {
    if (points.size() < 2) {
        throw Error("prefactor fit requires at least 2 points");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i].first >= 1.0) || !(points[i].second > 0.0)) {
            throw Error("prefactor fit requires N_T >= 1 and delta_theta > 0");
        }
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            if (points[i].first == points[j].first) {
                throw Error("prefactor fit requires pairwise distinct N_T");
            }
        }
    }
    double sum_log_c = 0.0;
    for (const auto& [n_total, width] : points) {
        sum_log_c += std::log(width) + exponent * std::log(n_total);
    }
    const double log_c = sum_log_c / static_cast<double>(points.size());
    double sum_sq = 0.0;
    for (const auto& [n_total, width] : points) {
        const double r = std::log(width) - (log_c - exponent * std::log(n_total));
        sum_sq += r * r;
    }
    ScalingFit fit;
    fit.exponent = exponent;
    fit.prefactor = std::exp(log_c);
    fit.residual = std::sqrt(sum_sq / static_cast<double>(points.size()));
    return fit;
}

WidthPoint all_yes_width(const Schedule& schedule, std::size_t grid_points) {
    const std::int64_t n_total = schedule.total_particles();
    const std::size_t n_points = grid_points != 0 ? grid_points : default_grid_points(n_total);
    const PhaseGrid grid = PhaseGrid::prior_window(1.0, n_points);
    LogPosterior posterior(grid);
    for (const auto& step : schedule.steps()) {
        const auto row = log_likelihood_on_grid(FringeModel::ideal(static_cast<int>(step.n_particles)),
                                                Outcome::yes, grid);
        for (std::int64_t rep = 0; rep < step.replicas; ++rep) {
            posterior.add_log_likelihood(row);
        }
    }
    const auto density = posterior.normalized();
    const double estimate = map_estimate(density, grid);
    const auto ci = confidence_interval(density, grid, estimate);
    return {n_total, ci.half_width, ci.saturated};
}

std::vector<ReplicaSweepRow> fig_m_sweep(std::span<const std::int64_t> r_values,
                                         std::int64_t m_min, std::int64_t m_max,
                                         std::span<const std::int64_t> p_for_r,
                                         std::size_t grid_points) {
    if (r_values.size() != p_for_r.size()) {
        throw Error("fig_m_sweep needs one p per r value");
    }
    if (m_min < 1 || m_max < m_min) {
        throw Error("fig_m_sweep requires 1 <= m_min <= m_max");
    }
    std::vector<ReplicaSweepRow> rows;
    for (std::size_t ri = 0; ri < r_values.size(); ++ri) {
        const std::int64_t r = r_values[ri];
        const std::int64_t p = p_for_r[ri];
        const Schedule base = Schedule::geometric(p, r, 1);
        const std::int64_t base_total = base.total_particles();

        // One grid per ratio, sized for the largest (narrowest-peak) row.
        const std::size_t n_points =
            grid_points != 0 ? grid_points : default_grid_points(base_total * m_max);
        const PhaseGrid grid = PhaseGrid::prior_window(1.0, n_points);

        // The all-yes log posterior for m replicas is m times the m = 1
        // log posterior, so the expensive trig pass happens once per ratio.
        std::vector<double> base_log(grid.size(), 0.0);
        for (const auto& step : base.steps()) {
            const auto row = log_likelihood_on_grid(
                FringeModel::ideal(static_cast<int>(step.n_particles)), Outcome::yes, grid);
            for (std::size_t i = 0; i < base_log.size(); ++i) {
                base_log[i] += row[i];
            }
        }

        const std::size_t first_row = rows.size();
        std::vector<double> scaled(grid.size());
        for (std::int64_t m = m_min; m <= m_max; ++m) {
            for (std::size_t i = 0; i < scaled.size(); ++i) {
                scaled[i] = static_cast<double>(m) * base_log[i];
            }
            const auto density = normalize_log_weights(scaled, grid);
            const double estimate = map_estimate(density, grid);
            const auto ci = confidence_interval(density, grid, estimate);
            ReplicaSweepRow row;
            row.r = r;
            row.m = m;
            row.p = p;
            row.n_total = base_total * m;
            row.half_width = ci.half_width;
            row.width_times_n = ci.half_width * static_cast<double>(row.n_total);
            rows.push_back(row);
        }

        std::size_t best = first_row;
        for (std::size_t i = first_row; i < rows.size(); ++i) {
            if (rows[i].width_times_n < rows[best].width_times_n) {
                best = i;
            }
        }
        rows[best].optimal = true;
    }
    return rows;
}

GainScanResult gain_scan(const Schedule& schedule, const ModelSource& source,
                         std::span<const double> thetas, double m_asymptotic, double prior_l,
                         std::size_t grid_points) {
    if (!(m_asymptotic > 0.0)) {
        throw Error("gain scan requires m_asymptotic > 0");
    }
    if (thetas.empty()) {
        throw Error("gain scan requires at least one theta");
    }
    const double n_total_effective =
        static_cast<double>(schedule.total_particles()) * m_asymptotic;
    const std::size_t n_points =
        grid_points != 0 ? grid_points
                         : default_grid_points(static_cast<std::int64_t>(
                               std::llround(std::max(1.0, n_total_effective))));
    const PhaseGrid grid = PhaseGrid::prior_window(prior_l, n_points);

    struct Term {
        FringeModel model;
        double replicas;
        std::vector<double> log_yes;
        std::vector<double> log_no;
    };
    std::map<std::int64_t, Term> terms;
    std::int64_t gcd_n = 0;
    for (const auto& step : schedule.steps()) {
        gcd_n = std::gcd(gcd_n, step.n_particles);
        auto it = terms.find(step.n_particles);
        if (it != terms.end()) {
            it->second.replicas += static_cast<double>(step.replicas);
            continue;
        }
        const FringeModel model = source.model_for(step.n_particles);
        terms.emplace(step.n_particles,
                      Term{model, static_cast<double>(step.replicas),
                           log_likelihood_on_grid(model, Outcome::yes, grid),
                           log_likelihood_on_grid(model, Outcome::no, grid)});
    }

    GainScanResult result;
    result.prior_bound = std::numbers::pi / static_cast<double>(gcd_n);
    result.n_total_effective = n_total_effective;
    result.rows.resize(thetas.size());

    detail::parallel_for(thetas.size(), [&](std::size_t ti) {
        const double theta = thetas[ti];
        std::vector<double> log_weights(grid.size(), 0.0);
        for (const auto& [n, term] : terms) {
            const double p_yes_true = prob_yes(term.model, theta);
            const double w_yes = m_asymptotic * term.replicas * p_yes_true;
            const double w_no = m_asymptotic * term.replicas * (1.0 - p_yes_true);
            for (std::size_t i = 0; i < log_weights.size(); ++i) {
                if (w_yes > 0.0) {
                    log_weights[i] += w_yes * term.log_yes[i];
                }
                if (w_no > 0.0) {
                    log_weights[i] += w_no * term.log_no[i];
                }
            }
        }
        const auto density = normalize_log_weights(log_weights, grid);
        const double estimate = folded_map_estimate(density, grid);
        const auto ci = folded_confidence_interval(density, grid, estimate);
        GainScanRow row;
        row.theta = theta;
        row.half_width = ci.half_width;
        row.saturated = ci.saturated;
        row.gain_db = gain_db(ci.half_width, n_total_effective);
        result.rows[ti] = row;
    });
    return result;
}

}  // namespace noonsim

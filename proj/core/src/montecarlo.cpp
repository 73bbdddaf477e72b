#include "noonsim/montecarlo.hpp"

#include <cmath>
#include <exception>
#include <map>
#include <string>
#include <utility>

#include "parallel_for.hpp"

namespace noonsim {

namespace {

std::uint64_t fmix64(std::uint64_t k) {
    k ^= k >> 33;
    k *= 0xFF51AFD7ED558CCDULL;
    k ^= k >> 33;
    k *= 0xC4CEB9FE1A85EC53ULL;
    k ^= k >> 33;
    return k;
}

std::uint64_t splitmix_step(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

TrialRng::TrialRng(SeedSpec seed)
    // Trial indices are mixed through the finalizer before touching the
    // master seed, so per-trial streams start at far-apart counters instead
    // of shifted copies of one another.
    : state_(fmix64(seed.master_seed ^ fmix64(seed.trial_index ^ 0x5851F42D4C957F2DULL))) {}

std::uint64_t TrialRng::next_u64() {
    return splitmix_step(state_);
}

double TrialRng::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

Outcome sample_outcome(const FringeModel& model, double theta_true, TrialRng& rng) {
    const double u = rng.next_unit();
    return u < prob_yes(model, theta_true) ? Outcome::yes : Outcome::no;
}

namespace {

// Per-(cat size, outcome) log-likelihood rows shared by every replica and,
// in an ensemble, by every trial.  Row values are exactly what
// LogPosterior::update would have added.
class LikelihoodCache {
  public:
    LikelihoodCache(const Schedule& schedule, const ModelSource& source, const PhaseGrid& grid) {
        for (const auto& step : schedule.steps()) {
            models_.emplace(step.n_particles, source.model_for(step.n_particles));
        }
        for (const auto& [n, model] : models_) {
            rows_.emplace(std::make_pair(n, Outcome::yes),
                          log_likelihood_on_grid(model, Outcome::yes, grid));
            rows_.emplace(std::make_pair(n, Outcome::no),
                          log_likelihood_on_grid(model, Outcome::no, grid));
        }
    }

    const FringeModel& model(std::int64_t n) const { return models_.at(n); }

    const std::vector<double>& row(std::int64_t n, Outcome r) const {
        return rows_.at(std::make_pair(n, r));
    }

  private:
    std::map<std::int64_t, FringeModel> models_;
    std::map<std::pair<std::int64_t, Outcome>, std::vector<double>> rows_;
};

TrialPosterior run_one(const TrialConfig& config, SeedSpec seed, const PhaseGrid& grid,
                       const LikelihoodCache& cache) {
    TrialRng rng(seed);
    LogPosterior posterior(grid);
    TrialResult result;
    result.theta_true = config.theta_true;
    result.outcomes.reserve(static_cast<std::size_t>(config.schedule.total_measurements()));
    for (const auto& step : config.schedule.steps()) {
        const FringeModel& model = cache.model(step.n_particles);
        for (std::int64_t rep = 0; rep < step.replicas; ++rep) {
            const Outcome r = sample_outcome(model, config.theta_true, rng);
            result.outcomes.emplace_back(step.n_particles, r);
            posterior.add_log_likelihood(cache.row(step.n_particles, r));
        }
    }
    auto density = posterior.normalized();
    const auto summary = summarize_folded(density, grid);
    result.estimate = summary.map_estimate;
    result.half_width = summary.half_width;
    result.saturated = summary.saturated;
    result.secondary_peak_ratio = summary.secondary_peak_ratio;
    return {grid, std::move(density), std::move(result)};
}

PhaseGrid trial_grid(const TrialConfig& config) {
    const std::size_t n_points = config.grid_points != 0
                                     ? config.grid_points
                                     : default_grid_points(config.schedule.total_particles());
    return PhaseGrid::prior_window(config.prior_l, n_points);
}

[[noreturn]] void rethrow_with_trial_index(std::uint64_t index) {
    const std::string prefix = "trial " + std::to_string(index) + ": ";
    try {
        throw;
    } catch (const DegeneratePosteriorError& e) {
        throw DegeneratePosteriorError(prefix + e.what());
    } catch (const CalibrationError& e) {
        throw CalibrationError(prefix + e.what());
    } catch (const std::exception& e) {
        throw Error(prefix + e.what());
    }
}

}  // namespace

TrialResult run_trial(const TrialConfig& config, SeedSpec seed) {
    return run_trial_with_posterior(config, seed).result;
}

TrialPosterior run_trial_with_posterior(const TrialConfig& config, SeedSpec seed) {
    const PhaseGrid grid = trial_grid(config);
    const LikelihoodCache cache(config.schedule, config.models, grid);
    return run_one(config, seed, grid, cache);
}

EnsembleStats run_ensemble(const TrialConfig& config, std::int64_t n_trials,
                           std::uint64_t master_seed) {
    if (n_trials < 1) {
        throw Error("ensemble requires n_trials >= 1");
    }
    const PhaseGrid grid = trial_grid(config);
    const LikelihoodCache cache(config.schedule, config.models, grid);

    std::vector<TrialResult> results(static_cast<std::size_t>(n_trials));
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(n_trials));
    detail::parallel_for(static_cast<std::size_t>(n_trials), [&](std::size_t i) {
        try {
            results[i] = run_one(config, SeedSpec{master_seed, i}, grid, cache).result;
        } catch (...) {
            failures[i] = std::current_exception();
        }
    });
    for (std::size_t i = 0; i < failures.size(); ++i) {
        if (failures[i]) {
            try {
                std::rethrow_exception(failures[i]);
            } catch (...) {
                rethrow_with_trial_index(i);
            }
        }
    }

    const double target = std::abs(config.theta_true);
    EnsembleStats stats;
    stats.n_trials = n_trials;
    double sum_width = 0.0;
    double sum_err = 0.0;
    double sum_sq_err = 0.0;
    std::int64_t saturated = 0;
    for (const auto& r : results) {
        const double err = r.estimate - target;
        sum_width += r.half_width;
        sum_err += err;
        sum_sq_err += err * err;
        if (r.saturated) ++saturated;
    }
    const auto n = static_cast<double>(n_trials);
    stats.mean_half_width = sum_width / n;
    stats.mean_bias = sum_err / n;
    stats.rms_error = std::sqrt(sum_sq_err / n);
    stats.saturation_fraction = static_cast<double>(saturated) / n;
    return stats;
}

}  // namespace noonsim

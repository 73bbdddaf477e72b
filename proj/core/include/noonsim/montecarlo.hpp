#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "noonsim/fringe.hpp"
#include "noonsim/posterior.hpp"
#include "noonsim/schedule.hpp"

namespace noonsim {

/// Identifies one trial's random stream.  The same (master_seed, trial_index)
/// always reproduces the identical outcome sequence, on any platform and
/// under any execution order.
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t trial_index = 0;
};

/// Counter-derived splitmix64 stream.  Self-contained so results do not
/// depend on the standard library's distribution implementations.
class TrialRng {
  public:
    explicit TrialRng(SeedSpec seed);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit();

  private:
    std::uint64_t state_;
};

/// Draws yes with probability prob_yes(model, theta_true); always consumes
/// exactly one value from the stream.
Outcome sample_outcome(const FringeModel& model, double theta_true, TrialRng& rng);

/// One simulated estimation experiment.
struct TrialResult {
    double theta_true = 0.0;
    /// Folded (magnitude) MAP estimate; the fringes carry no sign information.
    double estimate = 0.0;
    double half_width = 0.0;
    bool saturated = false;
    double secondary_peak_ratio = 0.0;
    /// Every individual measurement in schedule order, for audit and replay.
    std::vector<std::pair<std::int64_t, Outcome>> outcomes;
};

struct TrialConfig {
    Schedule schedule;
    ModelSource models;
    double theta_true = 0.0;
    double prior_l = 1.0;
    /// 0 means default_grid_points(total particles).
    std::size_t grid_points = 0;
};

/// Samples every scheduled measurement at the hidden true phase, multiplies
/// the per-outcome distributions into the posterior, and summarizes it.
/// The sampling model and the inference model are the same object: the
/// instrument is assumed calibrated.
TrialResult run_trial(const TrialConfig& config, SeedSpec seed);

/// run_trial plus the normalized posterior itself, for dumping and plotting.
struct TrialPosterior {
    PhaseGrid grid;
    std::vector<double> density;
    TrialResult result;
};

TrialPosterior run_trial_with_posterior(const TrialConfig& config, SeedSpec seed);

/// Aggregate statistics over an ensemble of independent trials.
struct EnsembleStats {
    std::int64_t n_trials = 0;
    double mean_half_width = 0.0;
    /// Errors are measured against the folded true phase |theta_true|.
    double rms_error = 0.0;
    double mean_bias = 0.0;
    double saturation_fraction = 0.0;
};

/// Runs n_trials independent trials with per-trial derived seeds
/// (master_seed, 0..n_trials-1) and aggregates.  Trials may execute
/// concurrently; the aggregate is reduced in trial order, so results are
/// identical to a serial run.
EnsembleStats run_ensemble(const TrialConfig& config, std::int64_t n_trials,
                           std::uint64_t master_seed);

}  // namespace noonsim

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "noonsim/errors.hpp"
#include "noonsim/fringe.hpp"

namespace noonsim {

/// Uniform discretization of a phase interval inside [-pi, pi].
/// Point i is lower + i*step with step = (upper-lower)/(n_points-1).
class PhaseGrid {
  public:
    PhaseGrid(double lower, double upper, std::size_t n_points);

    /// Prior window [-pi/L, pi/L]; L = 1 is complete ignorance.
    static PhaseGrid prior_window(double prior_l, std::size_t n_points);

    double lower() const { return lower_; }
    double upper() const { return upper_; }
    std::size_t size() const { return n_points_; }
    double step() const { return step_; }
    double point(std::size_t i) const { return lower_ + static_cast<double>(i) * step_; }

    /// True when the grid spans the full 2*pi period, in which case windows
    /// wrap circularly at +-pi.
    bool full_circle() const;

    /// True when the support is symmetric about zero (every prior window is).
    bool symmetric() const;

    std::size_t nearest_index(double phi) const;

    bool operator==(const PhaseGrid&) const = default;

  private:
    double lower_;
    double upper_;
    std::size_t n_points_;
    double step_;
};

/// Default grid resolution: at least 200 points across the ~1/N_T central
/// peak, never fewer than 4096 points in total.
std::size_t default_grid_points(std::int64_t n_total);

/// log P(outcome | N, phi) evaluated at every grid point; exactly-zero
/// likelihoods map to -inf.
std::vector<double> log_likelihood_on_grid(const FringeModel& model, Outcome outcome,
                                           const PhaseGrid& grid);

/// Gridded Bayesian posterior accumulated in log space.  Starting from a flat
/// prior, each measurement multiplies in one likelihood factor; log-space
/// sums keep p >= 40 measurements from underflowing.
class LogPosterior {
  public:
    explicit LogPosterior(PhaseGrid grid);

    /// Flat prior over [-pi/L, pi/L].  L < 1 is rejected.
    static LogPosterior uniform_prior(double prior_l, std::size_t n_points);

    const PhaseGrid& grid() const { return grid_; }
    const std::vector<double>& log_weights() const { return log_weights_; }
    std::size_t update_count() const { return update_count_; }

    /// Adds log P(outcome | model, phi) pointwise.
    void update(const FringeModel& model, Outcome outcome);

    /// Adds a precomputed log-likelihood row (one measurement).  Used by the
    /// ensemble driver to avoid recomputing identical rows per trial.
    void add_log_likelihood(std::span<const double> log_lik);

    /// Max-shifted exponential normalized to unit trapezoid integral.
    /// Throws DegeneratePosteriorError when every weight is -inf.
    std::vector<double> normalized() const;

  private:
    PhaseGrid grid_;
    std::vector<double> log_weights_;
    std::size_t update_count_ = 0;
};

/// Shift by the max finite log weight, exponentiate and normalize to unit
/// trapezoid integral over the grid.
std::vector<double> normalize_log_weights(std::span<const double> log_weights,
                                          const PhaseGrid& grid);

/// Prefix trapezoid integral of a gridded density with interpolated
/// fractional cells, so window masses are exact for the piecewise-linear
/// density the grid represents.
class CumulativeMass {
  public:
    CumulativeMass(std::span<const double> density, const PhaseGrid& grid);

    /// Integral over [a, b] intersected with the grid support.
    double mass(double a, double b) const;

    /// Integral over [a, b] treating the support as 2*pi-periodic.
    double wrapped_mass(double a, double b) const;

    double total() const { return prefix_.back(); }

  private:
    double prefix_at(double x) const;

    PhaseGrid grid_;
    std::vector<double> density_;
    std::vector<double> prefix_;
};

/// Grid point of maximum density.  Ties break toward the smallest |phi|,
/// then toward negative phi; the convention is arbitrary but documented so
/// multi-peak estimates are reproducible.
double map_estimate(std::span<const double> density, const PhaseGrid& grid);

struct IntervalEstimate {
    double half_width = 0.0;
    bool saturated = false;
};

/// Smallest half-width such that the window [estimate - dt, estimate + dt]
/// holds at least `mass` probability; window wraps circularly on full-circle
/// grids and truncates at the support otherwise.  Found by bisection to one
/// grid step.  If even a window spanning the whole support cannot reach the
/// mass, returns half the support width with the saturated flag set.
IntervalEstimate confidence_interval(std::span<const double> density, const PhaseGrid& grid,
                                     double estimate, double mass = 0.6827);

/// Height of the largest local maximum not connected to the MAP peak,
/// relative to the MAP height; 0 for a unimodal density.
double secondary_peak_ratio(std::span<const double> density, const PhaseGrid& grid);

/// The fringe law depends on phi only through cos(N*phi), so the data carry
/// no information about the sign of the phase: every posterior built here is
/// even in phi, with twin peaks at +-theta.  Estimation therefore reports the
/// phase magnitude, working on the folded domain [0, upper] with density
/// d(phi) + d(-phi).  The folded operations below implement that convention;
/// the signed operations above describe the raw posterior.
double folded_map_estimate(std::span<const double> density, const PhaseGrid& grid);

/// Confidence half-width of the folded density around a folded estimate.
/// Both boundaries reflect; saturation means the window exceeded the folded
/// support [0, upper].
IntervalEstimate folded_confidence_interval(std::span<const double> density, const PhaseGrid& grid,
                                            double estimate, double mass = 0.6827);

/// Secondary-peak ratio after merging mirror-image peaks.
double folded_secondary_peak_ratio(std::span<const double> density, const PhaseGrid& grid);

/// MAP estimate, confidence half-width and multimodality diagnostic in one
/// record.
struct PosteriorSummary {
    double map_estimate = 0.0;
    double half_width = 0.0;
    double secondary_peak_ratio = 0.0;
    bool saturated = false;
};

PosteriorSummary summarize(std::span<const double> density, const PhaseGrid& grid,
                           double mass = 0.6827);

/// Magnitude-convention summary used by trial simulation and gain analysis.
PosteriorSummary summarize_folded(std::span<const double> density, const PhaseGrid& grid,
                                  double mass = 0.6827);

/// One (model, exponent) term of the large-M limit.
struct WeightedModel {
    FringeModel model;
    double weight = 1.0;
};

/// Large-M limit of the replicated posterior at true phase theta_true:
/// log density = sum over models of
///   weight * [P(yes|N,theta) log P(yes|N,phi) + P(no|N,theta) log P(no|N,phi)],
/// normalized.  Weights (the replica counts) may be non-integer.
std::vector<double> asymptotic_posterior(std::span<const WeightedModel> models, double theta_true,
                                         const PhaseGrid& grid);

/// Same with a single common replica count m_replicas for every model.
std::vector<double> asymptotic_posterior(std::span<const FringeModel> models, double theta_true,
                                         double m_replicas, const PhaseGrid& grid);

}  // namespace noonsim

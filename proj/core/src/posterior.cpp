#include "noonsim/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace noonsim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Kahan-compensated accumulator; grids run to millions of points and the
// normalization contract is 1e-10.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

}  // namespace

PhaseGrid::PhaseGrid(double lower, double upper, std::size_t n_points)
    : lower_(lower), upper_(upper), n_points_(n_points) {
    if (!(lower < upper)) {
        throw Error("phase grid requires lower < upper");
    }
    if (lower < -kPi - 1e-12 || upper > kPi + 1e-12) {
        throw Error("phase grid must lie within [-pi, pi]");
    }
    if (n_points < 3) {
        throw Error("phase grid requires at least 3 points");
    }
    step_ = (upper_ - lower_) / static_cast<double>(n_points_ - 1);
}

PhaseGrid PhaseGrid::prior_window(double prior_l, std::size_t n_points) {
    if (!(prior_l >= 1.0)) {
        throw Error("prior window requires L >= 1");
    }
    return PhaseGrid(-kPi / prior_l, kPi / prior_l, n_points);
}

bool PhaseGrid::full_circle() const {
    return upper_ - lower_ >= 2.0 * kPi - 1e-12;
}

bool PhaseGrid::symmetric() const {
    return std::abs(lower_ + upper_) <= 1e-12;
}

std::size_t PhaseGrid::nearest_index(double phi) const {
    const double raw = (phi - lower_) / step_;
    if (raw <= 0.0) return 0;
    const auto idx = static_cast<std::size_t>(std::llround(raw));
    return std::min(idx, n_points_ - 1);
}

std::size_t default_grid_points(std::int64_t n_total) {
    if (n_total < 1) {
        throw Error("default_grid_points requires n_total >= 1");
    }
    return std::max<std::size_t>(4096, 200 * static_cast<std::size_t>(n_total));
}

std::vector<double> log_likelihood_on_grid(const FringeModel& model, Outcome outcome,
                                           const PhaseGrid& grid) {
    std::vector<double> row(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        row[i] = log_prob_outcome(model, outcome, grid.point(i));
    }
    return row;
}

LogPosterior::LogPosterior(PhaseGrid grid)
    : grid_(grid), log_weights_(grid.size(), 0.0) {}

LogPosterior LogPosterior::uniform_prior(double prior_l, std::size_t n_points) {
    return LogPosterior(PhaseGrid::prior_window(prior_l, n_points));
}

void LogPosterior::update(const FringeModel& model, Outcome outcome) {
    for (std::size_t i = 0; i < log_weights_.size(); ++i) {
        log_weights_[i] += log_prob_outcome(model, outcome, grid_.point(i));
    }
    ++update_count_;
}

void LogPosterior::add_log_likelihood(std::span<const double> log_lik) {
    if (log_lik.size() != log_weights_.size()) {
        throw Error("log-likelihood row does not match the grid size");
    }
    for (std::size_t i = 0; i < log_weights_.size(); ++i) {
        log_weights_[i] += log_lik[i];
    }
    ++update_count_;
}

std::vector<double> LogPosterior::normalized() const {
    return normalize_log_weights(log_weights_, grid_);
}

std::vector<double> normalize_log_weights(std::span<const double> log_weights,
                                          const PhaseGrid& grid) {
    if (log_weights.size() != grid.size()) {
        throw Error("log-weight vector does not match the grid size");
    }
    double max_log = kNegInf;
    for (double w : log_weights) {
        if (std::isfinite(w) && w > max_log) {
            max_log = w;
        }
    }
    if (!std::isfinite(max_log)) {
        throw DegeneratePosteriorError("posterior likelihood is zero at every grid point");
    }
    std::vector<double> density(log_weights.size());
    for (std::size_t i = 0; i < density.size(); ++i) {
        density[i] = std::exp(log_weights[i] - max_log);
    }
    CompensatedSum acc;
    const std::size_t n = density.size();
    for (std::size_t i = 0; i < n; ++i) {
        const bool edge = (i == 0 || i == n - 1);
        acc.add(edge ? 0.5 * density[i] : density[i]);
    }
    const double integral = acc.sum * grid.step();
    if (!(integral > 0.0)) {
        throw DegeneratePosteriorError("posterior density integrates to zero");
    }
    for (double& d : density) {
        d /= integral;
    }
    return density;
}

CumulativeMass::CumulativeMass(std::span<const double> density, const PhaseGrid& grid)
    : grid_(grid), density_(density.begin(), density.end()), prefix_(density.size(), 0.0) {
    if (density_.size() != grid.size()) {
        throw Error("density vector does not match the grid size");
    }
    CompensatedSum acc;
    const double h = grid_.step();
    for (std::size_t i = 0; i + 1 < density_.size(); ++i) {
        acc.add(0.5 * h * (density_[i] + density_[i + 1]));
        prefix_[i + 1] = acc.sum;
    }
}

double CumulativeMass::prefix_at(double x) const {
    const double lower = grid_.lower();
    const double upper = grid_.upper();
    if (x <= lower) return 0.0;
    if (x >= upper) return prefix_.back();
    const double h = grid_.step();
    auto cell = static_cast<std::size_t>((x - lower) / h);
    cell = std::min(cell, density_.size() - 2);
    double t = x - grid_.point(cell);
    if (t < 0.0) t = 0.0;
    const double f0 = density_[cell];
    const double f1 = density_[cell + 1];
    const double fx = f0 + (f1 - f0) * (t / h);
    return prefix_[cell] + 0.5 * t * (f0 + fx);
}

double CumulativeMass::mass(double a, double b) const {
    a = std::max(a, grid_.lower());
    b = std::min(b, grid_.upper());
    if (!(b > a)) return 0.0;
    return prefix_at(b) - prefix_at(a);
}

double CumulativeMass::wrapped_mass(double a, double b) const {
    const double period = grid_.upper() - grid_.lower();
    if (b - a >= period) return total();
    double shifted_a = a - period * std::floor((a - grid_.lower()) / period);
    const double shifted_b = shifted_a + (b - a);
    if (shifted_b <= grid_.upper()) {
        return mass(shifted_a, shifted_b);
    }
    return mass(shifted_a, grid_.upper()) + mass(grid_.lower(), grid_.lower() + (shifted_b - grid_.upper()));
}

double map_estimate(std::span<const double> density, const PhaseGrid& grid) {
    if (density.size() != grid.size()) {
        throw Error("density vector does not match the grid size");
    }
    std::size_t best = 0;
    double best_value = density[0];
    double best_phi = grid.point(0);
    for (std::size_t i = 1; i < density.size(); ++i) {
        const double v = density[i];
        const double phi = grid.point(i);
        bool better = v > best_value;
        if (v == best_value) {
            const double a = std::abs(phi);
            const double b = std::abs(best_phi);
            better = a < b || (a == b && phi < best_phi);
        }
        if (better) {
            best = i;
            best_value = v;
            best_phi = phi;
        }
    }
    return grid.point(best);
}

IntervalEstimate confidence_interval(std::span<const double> density, const PhaseGrid& grid,
                                     double estimate, double mass) {
    if (!(mass > 0.0 && mass < 1.0)) {
        throw Error("confidence mass must be inside (0, 1)");
    }
    if (estimate < grid.lower() - grid.step() || estimate > grid.upper() + grid.step()) {
        throw Error("confidence interval estimate lies outside the grid");
    }
    const CumulativeMass cum(density, grid);
    const bool wrap = grid.full_circle();
    const double half_support = 0.5 * (grid.upper() - grid.lower());
    const auto window_mass = [&](double dt) {
        if (wrap) return cum.wrapped_mass(estimate - dt, estimate + dt);
        return cum.mass(estimate - dt, estimate + dt);
    };
    if (window_mass(half_support) < mass) {
        return {half_support, true};
    }
    double lo = 0.0;
    double hi = half_support;
    while (hi - lo > grid.step()) {
        const double mid = 0.5 * (lo + hi);
        if (window_mass(mid) >= mass) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return {0.5 * (lo + hi), false};
}

namespace {

struct Peak {
    std::size_t index = 0;  // representative grid index (middle of a plateau)
    double height = 0.0;
};

// Strict local maxima with plateau handling.  On full-circle grids the two
// endpoint samples describe the same phase, so the scan is circular over the
// first n-1 entries; otherwise a boundary plateau only needs to dominate its
// interior neighbor.
std::vector<Peak> find_local_maxima(std::span<const double> density, const PhaseGrid& grid) {
    const bool wrap = grid.full_circle();
    const std::size_t m = wrap ? density.size() - 1 : density.size();
    std::vector<Peak> peaks;
    if (m == 0) return peaks;

    if (!wrap) {
        std::size_t s = 0;
        while (s < m) {
            std::size_t e = s;
            while (e + 1 < m && density[e + 1] == density[s]) ++e;
            const bool left_ok = s == 0 || density[s - 1] < density[s];
            const bool right_ok = e == m - 1 || density[e + 1] < density[s];
            if (left_ok && right_ok) {
                peaks.push_back({(s + e) / 2, density[s]});
            }
            s = e + 1;
        }
        return peaks;
    }

    // circular: find a run boundary to anchor the walk
    std::size_t anchor = m;  // m = "all equal"
    for (std::size_t i = 0; i < m; ++i) {
        if (density[i] != density[(i + m - 1) % m]) {
            anchor = i;
            break;
        }
    }
    if (anchor == m) {
        return {{0, density[0]}};  // constant density: one plateau
    }
    std::size_t walked = 0;
    std::size_t s = anchor;
    while (walked < m) {
        std::size_t len = 1;
        while (len < m && density[(s + len) % m] == density[s]) ++len;
        const std::size_t prev = (s + m - 1) % m;
        const std::size_t next = (s + len) % m;
        if (density[prev] < density[s] && density[next] < density[s]) {
            peaks.push_back({(s + len / 2) % m, density[s]});
        }
        walked += len;
        s = (s + len) % m;
    }
    return peaks;
}

double ratio_of_top_two(std::vector<double> heights) {
    if (heights.size() < 2) return 0.0;
    std::partial_sort(heights.begin(), heights.begin() + 2, heights.end(), std::greater<>());
    if (!(heights[0] > 0.0)) return 0.0;
    return heights[1] / heights[0];
}

}  // namespace

double secondary_peak_ratio(std::span<const double> density, const PhaseGrid& grid) {
    const auto peaks = find_local_maxima(density, grid);
    std::vector<double> heights;
    heights.reserve(peaks.size());
    for (const auto& p : peaks) heights.push_back(p.height);
    return ratio_of_top_two(std::move(heights));
}

double folded_map_estimate(std::span<const double> density, const PhaseGrid& grid) {
    // Physical posteriors are even in phi, so the magnitude of the signed MAP
    // is the MAP of the folded density up to one grid step.
    return std::abs(map_estimate(density, grid));
}

IntervalEstimate folded_confidence_interval(std::span<const double> density, const PhaseGrid& grid,
                                            double estimate, double mass) {
    if (!(mass > 0.0 && mass < 1.0)) {
        throw Error("confidence mass must be inside (0, 1)");
    }
    if (!grid.symmetric()) {
        throw Error("folded confidence interval requires a grid symmetric about zero");
    }
    const double support = grid.upper();
    double est = std::abs(estimate);
    if (est > support + grid.step()) {
        throw Error("folded estimate lies outside the folded support");
    }
    est = std::min(est, support);
    const CumulativeMass cum(density, grid);
    const auto window_mass = [&](double dt) {
        const double a = std::max(0.0, est - dt);
        const double b = std::min(support, est + dt);
        if (!(b > a)) return 0.0;
        return cum.mass(a, b) + cum.mass(-b, -a);
    };
    const double half_support = 0.5 * support;
    if (window_mass(half_support) < mass) {
        return {half_support, true};
    }
    double lo = 0.0;
    double hi = half_support;
    while (hi - lo > grid.step()) {
        const double mid = 0.5 * (lo + hi);
        if (window_mass(mid) >= mass) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return {0.5 * (lo + hi), false};
}

double folded_secondary_peak_ratio(std::span<const double> density, const PhaseGrid& grid) {
    const auto peaks = find_local_maxima(density, grid);
    if (peaks.size() < 2) return 0.0;

    struct FoldedPeak {
        double position;
        double height;
    };
    std::vector<FoldedPeak> folded;
    folded.reserve(peaks.size());
    for (const auto& p : peaks) {
        folded.push_back({std::abs(grid.point(p.index)), p.height});
    }
    std::sort(folded.begin(), folded.end(),
              [](const FoldedPeak& a, const FoldedPeak& b) { return a.position < b.position; });

    // mirror images land within a grid step of each other once folded
    const double merge_distance = 1.5 * grid.step();
    std::vector<double> heights;
    double group_pos = folded.front().position;
    double group_height = folded.front().height;
    for (std::size_t i = 1; i < folded.size(); ++i) {
        if (folded[i].position - group_pos <= merge_distance) {
            group_height = std::max(group_height, folded[i].height);
        } else {
            heights.push_back(group_height);
            group_height = folded[i].height;
        }
        group_pos = folded[i].position;
    }
    heights.push_back(group_height);
    return ratio_of_top_two(std::move(heights));
}

PosteriorSummary summarize(std::span<const double> density, const PhaseGrid& grid, double mass) {
    PosteriorSummary out;
    out.map_estimate = map_estimate(density, grid);
    const auto ci = confidence_interval(density, grid, out.map_estimate, mass);
    out.half_width = ci.half_width;
    out.saturated = ci.saturated;
    out.secondary_peak_ratio = secondary_peak_ratio(density, grid);
    return out;
}

PosteriorSummary summarize_folded(std::span<const double> density, const PhaseGrid& grid,
                                  double mass) {
    PosteriorSummary out;
    out.map_estimate = folded_map_estimate(density, grid);
    const auto ci = folded_confidence_interval(density, grid, out.map_estimate, mass);
    out.half_width = ci.half_width;
    out.saturated = ci.saturated;
    out.secondary_peak_ratio = folded_secondary_peak_ratio(density, grid);
    return out;
}

std::vector<double> asymptotic_posterior(std::span<const WeightedModel> models, double theta_true,
                                         const PhaseGrid& grid) {
    if (models.empty()) {
        throw Error("asymptotic posterior requires at least one model");
    }
    std::vector<double> log_weights(grid.size(), 0.0);
    for (const auto& wm : models) {
        if (!(wm.weight > 0.0)) {
            throw Error("asymptotic posterior requires positive replica weights");
        }
        const double p_yes_true = prob_yes(wm.model, theta_true);
        const double w_yes = wm.weight * p_yes_true;
        const double w_no = wm.weight * (1.0 - p_yes_true);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double phi = grid.point(i);
            // zero-probability outcomes at theta_true contribute nothing
            // (w * log p with w = 0 is taken as 0, never NaN)
            if (w_yes > 0.0) {
                log_weights[i] += w_yes * log_prob_outcome(wm.model, Outcome::yes, phi);
            }
            if (w_no > 0.0) {
                log_weights[i] += w_no * log_prob_outcome(wm.model, Outcome::no, phi);
            }
        }
    }
    return normalize_log_weights(log_weights, grid);
}

std::vector<double> asymptotic_posterior(std::span<const FringeModel> models, double theta_true,
                                         double m_replicas, const PhaseGrid& grid) {
    if (!(m_replicas > 0.0)) {
        throw Error("asymptotic posterior requires m_replicas > 0");
    }
    std::vector<WeightedModel> weighted;
    weighted.reserve(models.size());
    for (const auto& m : models) {
        weighted.push_back({m, m_replicas});
    }
    return asymptotic_posterior(std::span<const WeightedModel>(weighted), theta_true, grid);
}

}  // namespace noonsim

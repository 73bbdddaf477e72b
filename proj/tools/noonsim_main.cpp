#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "noonsim/analysis.hpp"
#include "noonsim/montecarlo.hpp"
#include "noonsim/posterior.hpp"
#include "noonsim/schedule.hpp"

using namespace noonsim;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitCalibration = 3;
constexpr int kExitDegenerate = 4;

std::string cell_text(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string cell_text(std::int64_t value) {
    return std::to_string(value);
}

std::string cell_text(bool value) {
    return value ? "1" : "0";
}

std::string cell_text(const std::string& value) {
    return value;
}

std::string cell_text(const char* value) {
    return value;
}

// Rows are built in memory and written in one shot: either to stdout or to a
// temp file renamed over the target, so a failed run never leaves a partial
// output file behind.
class TableSink {
  public:
    explicit TableSink(std::string out_path) : out_path_(std::move(out_path)) {}

    void header(const std::vector<std::string>& names) { row_impl(names); }

    template <typename... Cells>
    void row(const Cells&... cells) {
        row_impl({cell_text(cells)...});
    }

    void blank_line() { body_ += "\n"; }

    void flush() {
        if (out_path_.empty()) {
            std::cout << body_;
            std::cout.flush();
            return;
        }
        namespace fs = std::filesystem;
        const fs::path target(out_path_);
        const fs::path tmp = target.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::trunc);
            if (!out) {
                throw Error("cannot open output file " + tmp.string());
            }
            out << body_;
            if (!out.good()) {
                std::error_code ignored;
                fs::remove(tmp, ignored);
                throw Error("failed writing " + tmp.string());
            }
        }
        fs::rename(tmp, target);
    }

  private:
    void row_impl(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) body_ += '\t';
            body_ += cells[i];
        }
        body_ += '\n';
    }

    std::string out_path_;
    std::string body_;
};

struct CommonOptions {
    std::string schedule_literal;
    double theta = 0.0;
    double prior_l = 1.0;
    std::size_t grid_points = 0;
    std::int64_t trials = 200;
    std::uint64_t seed = 1;
    std::string calib_path;
    std::string out_path;
};

ModelSource make_source(const CommonOptions& options) {
    if (options.calib_path.empty()) {
        return ModelSource::ideal();
    }
    std::ifstream in(options.calib_path);
    if (!in) {
        throw CalibrationError("cannot open calibration file " + options.calib_path);
    }
    return ModelSource::calibrated(load_calibration(in));
}

TrialConfig make_trial_config(const CommonOptions& options) {
    return TrialConfig{parse_schedule(options.schedule_literal), make_source(options),
                       options.theta, options.prior_l, options.grid_points};
}

std::int64_t parse_strict_int(const std::string& token, const std::string& context) {
    std::int64_t value = 0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || token.empty()) {
        throw ParseError("bad integer '" + token + "' in " + context);
    }
    return value;
}

std::pair<std::int64_t, std::int64_t> parse_range(const std::string& text) {
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
        const std::int64_t v = parse_strict_int(text, "range '" + text + "'");
        return {v, v};
    }
    const std::int64_t lo = parse_strict_int(text.substr(0, dots), "range '" + text + "'");
    const std::int64_t hi = parse_strict_int(text.substr(dots + 2), "range '" + text + "'");
    if (hi < lo) {
        throw ParseError("range '" + text + "' is empty");
    }
    return {lo, hi};
}

std::vector<std::int64_t> parse_int_list(const std::string& text) {
    std::vector<std::int64_t> values;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        values.push_back(parse_strict_int(item, "list '" + text + "'"));
    }
    if (values.empty()) {
        throw ParseError("empty integer list '" + text + "'");
    }
    return values;
}

void cmd_sense(const CommonOptions& options) {
    const TrialConfig config = make_trial_config(options);
    const TrialResult trial = run_trial(config, SeedSpec{options.seed, 0});
    TableSink sink(options.out_path);
    sink.header({"schedule", "theta_true", "prior_l", "n_total", "estimate", "delta_theta",
                 "saturated", "secondary_peak_ratio", "seed"});
    sink.row(options.schedule_literal, trial.theta_true, options.prior_l,
             config.schedule.total_particles(), trial.estimate, trial.half_width,
             trial.saturated, trial.secondary_peak_ratio, static_cast<std::int64_t>(options.seed));
    sink.flush();
}

void cmd_ensemble(const CommonOptions& options) {
    const TrialConfig config = make_trial_config(options);
    const EnsembleStats stats = run_ensemble(config, options.trials, options.seed);
    TableSink sink(options.out_path);
    sink.header({"schedule", "theta_true", "prior_l", "n_trials", "mean_half_width", "rms_error",
                 "mean_bias", "saturation_fraction", "master_seed"});
    sink.row(options.schedule_literal, options.theta, options.prior_l, stats.n_trials,
             stats.mean_half_width, stats.rms_error, stats.mean_bias, stats.saturation_fraction,
             static_cast<std::int64_t>(options.seed));
    sink.flush();
}

void cmd_scaling(const CommonOptions& options, const std::string& family,
                 const std::string& p_range, double alpha, std::int64_t ratio,
                 std::int64_t n_tilde, std::int64_t replicas) {
    const auto [p_lo, p_hi] = parse_range(p_range);
    if (p_lo < 1) {
        throw ParseError("scaling requires p >= 1");
    }
    TableSink sink(options.out_path);
    sink.header({"family", "p", "r_or_nt", "m", "n_total", "delta_theta", "saturated"});
    std::vector<std::pair<double, double>> points;
    std::int64_t excluded = 0;
    for (std::int64_t p = p_lo; p <= p_hi; ++p) {
        Schedule schedule = family == "geom" ? Schedule::geometric(p, ratio, replicas)
                                             : Schedule::arithmetic(p, n_tilde);
        const WidthPoint point = all_yes_width(schedule, options.grid_points);
        sink.row(family, p, family == "geom" ? ratio : n_tilde, family == "geom" ? replicas : 1,
                 point.n_total, point.half_width, point.saturated);
        if (point.saturated) {
            ++excluded;
        } else {
            points.emplace_back(static_cast<double>(point.n_total), point.half_width);
        }
    }
    const ScalingFit fit = fit_prefactor(points, alpha);
    sink.blank_line();
    sink.header({"alpha", "prefactor", "residual", "points_used", "points_saturated"});
    sink.row(fit.exponent, fit.prefactor, fit.residual,
             static_cast<std::int64_t>(points.size()), excluded);
    sink.flush();
}

void cmd_gain_scan(const CommonOptions& options, double theta_min, double theta_max,
                   std::int64_t theta_steps, double asym_m) {
    if (theta_steps < 1) {
        throw ParseError("gain-scan requires --theta-steps >= 1");
    }
    const Schedule schedule = parse_schedule(options.schedule_literal);
    const ModelSource source = make_source(options);
    std::vector<double> thetas;
    thetas.reserve(static_cast<std::size_t>(theta_steps));
    for (std::int64_t j = 0; j < theta_steps; ++j) {
        const double t = theta_steps == 1
                             ? theta_min
                             : theta_min + (theta_max - theta_min) *
                                               static_cast<double>(j) /
                                               static_cast<double>(theta_steps - 1);
        thetas.push_back(t);
    }
    const GainScanResult scan =
        gain_scan(schedule, source, thetas, asym_m, options.prior_l, options.grid_points);
    TableSink sink(options.out_path);
    sink.header({"theta", "delta_theta", "gain_db", "saturated", "prior_bound", "n_total"});
    for (const auto& row : scan.rows) {
        sink.row(row.theta, row.half_width, row.gain_db, row.saturated, scan.prior_bound,
                 scan.n_total_effective);
    }
    sink.flush();
}

void cmd_fig_m(const CommonOptions& options, const std::string& r_list, const std::string& m_range,
               const std::string& p_list) {
    const std::vector<std::int64_t> rs = parse_int_list(r_list);
    const auto [m_lo, m_hi] = parse_range(m_range);
    std::vector<std::int64_t> ps;
    if (!p_list.empty()) {
        ps = parse_int_list(p_list);
        if (ps.size() == 1) {
            ps.assign(rs.size(), ps.front());
        }
        if (ps.size() != rs.size()) {
            throw ParseError("--p must supply one value or one per --r entry");
        }
    } else {
        // sequence lengths whose replica optima match the reference curves
        const std::map<std::int64_t, std::int64_t> default_p{{2, 10}, {3, 6}, {4, 4}, {5, 3}};
        for (std::int64_t r : rs) {
            const auto it = default_p.find(r);
            if (it == default_p.end()) {
                throw ParseError("no default sequence length for r=" + std::to_string(r) +
                                 "; pass --p explicitly");
            }
            ps.push_back(it->second);
        }
    }
    const auto rows = fig_m_sweep(rs, m_lo, m_hi, ps, options.grid_points);
    TableSink sink(options.out_path);
    sink.header({"r", "m", "p", "n_total", "delta_theta", "delta_theta_n_total", "optimal"});
    for (const auto& row : rows) {
        sink.row(row.r, row.m, row.p, row.n_total, row.half_width, row.width_times_n, row.optimal);
    }
    sink.flush();
}

void cmd_posterior_dump(const CommonOptions& options) {
    const TrialConfig config = make_trial_config(options);
    const TrialPosterior posterior = run_trial_with_posterior(config, SeedSpec{options.seed, 0});
    TableSink sink(options.out_path);
    sink.header({"phi", "density"});
    for (std::size_t i = 0; i < posterior.grid.size(); ++i) {
        sink.row(posterior.grid.point(i), posterior.density[i]);
    }
    sink.flush();
}

void add_schedule_option(CLI::App* cmd, CommonOptions& options) {
    cmd->add_option("--schedule", options.schedule_literal,
                    "schedule literal: single:15 | arith:p=6,nt=1 | geom:p=4,r=2,m=1 | "
                    "fixed:n=3,m=10 | ions:nmax=6,m=10")
        ->required();
}

void add_theta_option(CLI::App* cmd, CommonOptions& options) {
    cmd->add_option("--theta", options.theta, "true phase shift in radians")
        ->capture_default_str();
}

void add_prior_option(CLI::App* cmd, CommonOptions& options) {
    cmd->add_option("--prior-l", options.prior_l, "prior window is [-pi/L, pi/L]")
        ->check(CLI::Range(1.0, 1e9))
        ->capture_default_str();
}

void add_grid_option(CLI::App* cmd, CommonOptions& options) {
    cmd->add_option("--grid", options.grid_points,
                    "phase grid points; 0 selects max(4096, 200*N_T)")
        ->capture_default_str();
}

void add_seed_option(CLI::App* cmd, CommonOptions& options) {
    cmd->add_option("--seed", options.seed, "master seed for the measurement stream")
        ->capture_default_str();
}

void add_calib_option(CLI::App* cmd, CommonOptions& options) {
    cmd->add_option("--calib", options.calib_path,
                    "calibration JSON; absent means the ideal instrument");
}

void add_out_option(CLI::App* cmd, CommonOptions& options) {
    cmd->add_option("--out", options.out_path, "output file (default: stdout)");
}

void add_trial_options(CLI::App* cmd, CommonOptions& options) {
    add_schedule_option(cmd, options);
    add_theta_option(cmd, options);
    add_prior_option(cmd, options);
    add_grid_option(cmd, options);
    add_seed_option(cmd, options);
    add_calib_option(cmd, options);
    add_out_option(cmd, options);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NOON-state interferometry simulator: Bayesian phase estimation with "
                 "cat-state measurement schedules"};
    app.require_subcommand(1);

    CommonOptions options;

    auto* sense = app.add_subcommand("sense", "simulate one estimation experiment");
    add_trial_options(sense, options);

    auto* ensemble = app.add_subcommand("ensemble", "aggregate statistics over repeated trials");
    add_trial_options(ensemble, options);
    ensemble->add_option("--trials", options.trials, "number of independent trials")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    auto* scaling =
        app.add_subcommand("scaling", "deterministic all-yes widths and a fixed-exponent fit");
    add_grid_option(scaling, options);
    add_out_option(scaling, options);
    std::string family = "geom";
    std::string p_range;
    double alpha = 1.0;
    std::int64_t ratio = 2;
    std::int64_t n_tilde = 1;
    std::int64_t replicas = 1;
    scaling->add_option("--family", family, "schedule family: geom or arith")
        ->check(CLI::IsMember({"geom", "arith"}))
        ->capture_default_str();
    scaling->add_option("--p", p_range, "sequence length range, e.g. 8..14")->required();
    scaling->add_option("--alpha", alpha, "fixed fit exponent")->capture_default_str();
    scaling->add_option("--r", ratio, "geometric ratio")->capture_default_str();
    scaling->add_option("--nt", n_tilde, "arithmetic base cat size")->capture_default_str();
    scaling->add_option("--m", replicas, "replicas per step (geom)")->capture_default_str();

    auto* gain = app.add_subcommand("gain-scan", "large-M gain versus true phase");
    add_schedule_option(gain, options);
    add_prior_option(gain, options);
    add_grid_option(gain, options);
    add_calib_option(gain, options);
    add_out_option(gain, options);
    double theta_min = 0.05;
    double theta_max = 3.0915926535897933;
    std::int64_t theta_steps = 50;
    double asym_m = 400.0;
    gain->add_option("--theta-min", theta_min, "scan start")->capture_default_str();
    gain->add_option("--theta-max", theta_max, "scan end")->capture_default_str();
    gain->add_option("--theta-steps", theta_steps, "number of scan points")
        ->capture_default_str();
    gain->add_option("--asym-m", asym_m, "asymptotic replica count")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    auto* fig_m = app.add_subcommand("fig-m", "sensitivity versus replica count per ratio");
    add_grid_option(fig_m, options);
    add_out_option(fig_m, options);
    std::string r_list = "2,3,4,5";
    std::string m_range = "1..12";
    std::string p_list;
    fig_m->add_option("--r", r_list, "comma-separated ratios")->capture_default_str();
    fig_m->add_option("--m", m_range, "replica range, e.g. 1..12")->capture_default_str();
    fig_m->add_option("--p", p_list,
                      "sequence length per ratio (defaults: r=2:10, r=3:6, r=4:4, r=5:3)");

    auto* dump = app.add_subcommand("posterior-dump", "two-column (phi, density) posterior dump");
    add_trial_options(dump, options);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (sense->parsed()) {
            cmd_sense(options);
        } else if (ensemble->parsed()) {
            cmd_ensemble(options);
        } else if (scaling->parsed()) {
            cmd_scaling(options, family, p_range, alpha, ratio, n_tilde, replicas);
        } else if (gain->parsed()) {
            cmd_gain_scan(options, theta_min, theta_max, theta_steps, asym_m);
        } else if (fig_m->parsed()) {
            cmd_fig_m(options, r_list, m_range, p_list);
        } else if (dump->parsed()) {
            cmd_posterior_dump(options);
        }
    } catch (const ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const CalibrationError& e) {
        std::cerr << "calibration error: " << e.what() << "\n";
        return kExitCalibration;
    } catch (const DegeneratePosteriorError& e) {
        std::cerr << "degenerate posterior: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

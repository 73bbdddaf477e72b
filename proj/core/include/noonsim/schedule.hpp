#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "noonsim/errors.hpp"

namespace noonsim {

/// One measurement plan entry: a cat size and how many times it is repeated.
struct ScheduleStep {
    std::int64_t n_particles = 0;
    std::int64_t replicas = 0;

    bool operator==(const ScheduleStep&) const = default;
};

/// Ordered measurement plan.  Pure data; constructing then enumerating the
/// steps is lossless.  Totals are exact 64-bit integer arithmetic and
/// overflow is a hard error, never a silent wraparound.
class Schedule {
  public:
    explicit Schedule(std::vector<ScheduleStep> steps);

    /// One measurement with all n_total particles at once.
    static Schedule single(std::int64_t n_total);

    /// Cat sizes n_tilde, 2*n_tilde, ..., p*n_tilde, one shot each.
    static Schedule arithmetic(std::int64_t p, std::int64_t n_tilde = 1);

    /// Cat sizes r^0, r^1, ..., r^(p-1), each repeated m times.
    static Schedule geometric(std::int64_t p, std::int64_t r = 2, std::int64_t m = 1);

    /// One cat size n_tilde repeated m times.
    static Schedule fixed(std::int64_t n_tilde, std::int64_t m);

    /// Cat sizes 1, 2, ..., n_max, each repeated m times.
    static Schedule ion_sequence(std::int64_t n_max, std::int64_t m);

    const std::vector<ScheduleStep>& steps() const { return steps_; }

    /// Sum over steps of n_particles * replicas.
    std::int64_t total_particles() const { return total_particles_; }

    /// Total number of individual measurements (sum of replicas).
    std::int64_t total_measurements() const { return total_measurements_; }

    /// Largest cat size in the plan.
    std::int64_t max_particles() const;

    bool operator==(const Schedule&) const = default;

  private:
    std::vector<ScheduleStep> steps_;
    std::int64_t total_particles_ = 0;
    std::int64_t total_measurements_ = 0;
};

/// Parses the CLI schedule literal grammar:
///   single:15   arith:p=6,nt=1   geom:p=4,r=2,m=1   fixed:n=3,m=10   ions:nmax=6,m=10
/// Keys with documented defaults (nt=1, r=2, m=1, nmax=6) may be omitted;
/// unknown keys, duplicate keys, or malformed numbers throw ParseError naming
/// the offending token.
Schedule parse_schedule(const std::string& literal);

/// Canonical literal for a schedule built by one of the named constructors;
/// falls back to an explicit step list "steps:NxM,NxM,..." otherwise.
/// parse_schedule(format_schedule(s)) == s.
std::string format_schedule(const Schedule& schedule);

}  // namespace noonsim

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>

#include "noonsim/errors.hpp"

namespace noonsim {

/// Result of a single interferometric measurement.
enum class Outcome : std::uint8_t { yes, no };

/// Fringe law for one cat size: P(yes | theta) = offset + (contrast/2) * cos(N * theta).
///
/// The ideal interferometer has offset 1/2 and contrast 1, which reduces to
/// cos^2(N*theta/2). Reduced contrast models the calibrated, noisy instrument.
class FringeModel {
  public:
    FringeModel(int n_particles, double offset, double contrast);

    /// Perfect-visibility model: offset 1/2, contrast 1.
    static FringeModel ideal(int n_particles);

    int n_particles() const { return n_particles_; }
    double offset() const { return offset_; }
    double contrast() const { return contrast_; }

    bool is_ideal() const { return offset_ == 0.5 && contrast_ == 1.0; }

  private:
    int n_particles_;
    double offset_;
    double contrast_;
};

/// P(yes | N, theta) = A + (C/2) cos(N theta).  Always in [0, 1] for a valid
/// model.  Evaluated in the equivalent half-angle form
/// (A - C/2) + C cos^2(N theta / 2), which has no cancellation near the
/// fringe zeros.
double prob_yes(const FringeModel& model, double theta);

/// P(no | N, theta) = 1 - P(yes | N, theta).
double prob_no(const FringeModel& model, double theta);

double prob_outcome(const FringeModel& model, Outcome r, double theta);

/// log P(outcome | N, theta), relative-accurate arbitrarily close to the
/// fringe zeros; -inf where the probability is exactly zero.
double log_prob_outcome(const FringeModel& model, Outcome r, double theta);

/// Independent check of the ideal fringe law: evolves the two cat-state
/// amplitudes (1/sqrt2, 1/sqrt2) under the relative-number generator and
/// returns the squared overlap with the unshifted state.  Must agree with
/// prob_yes(ideal(n), theta) to ~1e-12.
double noon_overlap_oracle(int n, double theta);

/// Per-cat-size calibration (offset, contrast) pairs, keyed by particle number.
/// Lookup of an absent N throws; there is deliberately no ideal fallback.
class CalibrationTable {
  public:
    CalibrationTable() = default;

    /// Throws CalibrationError if n is already present or the model is invalid.
    void insert(const FringeModel& model);

    bool contains(int n) const { return entries_.count(n) != 0; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    /// Throws CalibrationError naming n if absent.
    const FringeModel& at(int n) const;

    const std::map<int, FringeModel>& entries() const { return entries_; }

  private:
    std::map<int, FringeModel> entries_;
};

/// Parses the JSON calibration document (see README for the schema):
///   [ {"n": 1, "offset": 0.5, "contrast": 0.98}, ... ]
/// Duplicate n or an entry violating the probability bounds is an error.
CalibrationTable load_calibration(std::istream& in);

/// Writes the table in the same format load_calibration accepts (round-trip stable).
void write_calibration(std::ostream& out, const CalibrationTable& table);

/// Where a simulation gets its per-N fringe models: either the ideal law
/// for every N, or a calibration table with strict per-N lookup.
class ModelSource {
  public:
    static ModelSource ideal();
    static ModelSource calibrated(CalibrationTable table);

    bool is_calibrated() const { return table_.has_value(); }

    /// Ideal source: ideal(n).  Calibrated source: table lookup, throwing
    /// CalibrationError for an absent n.
    FringeModel model_for(int n) const;

  private:
    ModelSource() = default;
    std::optional<CalibrationTable> table_;
};

}  // namespace noonsim

#include "noonsim/fringe.hpp"

#include <cmath>
#include <complex>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace noonsim {

namespace {

void validate_model(int n_particles, double offset, double contrast) {
    if (n_particles < 1) {
        throw CalibrationError("fringe model requires n >= 1, got n=" + std::to_string(n_particles));
    }
    if (!(contrast >= 0.0)) {
        throw CalibrationError("fringe model requires contrast >= 0 at n=" + std::to_string(n_particles));
    }
    // The law A + (C/2) cos(N theta) must stay within [0, 1] for every theta.
    if (!(offset - contrast / 2.0 >= 0.0) || !(offset + contrast / 2.0 <= 1.0)) {
        std::ostringstream msg;
        msg << "fringe model out of probability bounds at n=" << n_particles
            << " (offset=" << offset << ", contrast=" << contrast
            << "): need 0 <= offset - contrast/2 and offset + contrast/2 <= 1";
        throw CalibrationError(msg.str());
    }
}

}  // namespace

FringeModel::FringeModel(int n_particles, double offset, double contrast)
    : n_particles_(n_particles), offset_(offset), contrast_(contrast) {
    validate_model(n_particles, offset, contrast);
}

FringeModel FringeModel::ideal(int n_particles) {
    return FringeModel(n_particles, 0.5, 1.0);
}

double prob_yes(const FringeModel& model, double theta) {
    // (A - C/2) + C cos^2(N theta / 2): both terms nonnegative, so values
    // near zero keep full relative accuracy.
    const double c = std::cos(0.5 * model.n_particles() * theta);
    const double p = (model.offset() - 0.5 * model.contrast()) + model.contrast() * c * c;
    return p > 1.0 ? 1.0 : p;
}

double prob_no(const FringeModel& model, double theta) {
    return 1.0 - prob_yes(model, theta);
}

double prob_outcome(const FringeModel& model, Outcome r, double theta) {
    return r == Outcome::yes ? prob_yes(model, theta) : prob_no(model, theta);
}

double log_prob_outcome(const FringeModel& model, Outcome r, double theta) {
    const double x = 0.5 * model.n_particles() * theta;
    double p = 0.0;
    if (r == Outcome::yes) {
        const double c = std::cos(x);
        p = (model.offset() - 0.5 * model.contrast()) + model.contrast() * c * c;
    } else {
        // 1 - A - (C/2) cos(N theta) = (1 - A - C/2) + C sin^2(N theta / 2)
        const double s = std::sin(x);
        p = (1.0 - model.offset() - 0.5 * model.contrast()) + model.contrast() * s * s;
    }
    return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
}

double noon_overlap_oracle(int n, double theta) {
    if (n < 1) {
        throw Error("noon_overlap_oracle requires n >= 1");
    }
    // Two-amplitude cat state (1/sqrt2, 1/sqrt2); the global cat phase drops
    // out of every probability, so it is fixed to 0 here.  The relative-number
    // generator gives the components opposite phases ∓ n*theta/2.
    const std::complex<double> amp(1.0 / std::sqrt(2.0), 0.0);
    const std::complex<double> shifted_a = amp * std::polar(1.0, -0.5 * n * theta);
    const std::complex<double> shifted_b = amp * std::polar(1.0, +0.5 * n * theta);
    const std::complex<double> overlap = std::conj(amp) * shifted_a + std::conj(amp) * shifted_b;
    return std::norm(overlap);
}

void CalibrationTable::insert(const FringeModel& model) {
    auto [it, fresh] = entries_.emplace(model.n_particles(), model);
    if (!fresh) {
        throw CalibrationError("duplicate calibration entry for n=" + std::to_string(model.n_particles()));
    }
}

const FringeModel& CalibrationTable::at(int n) const {
    auto it = entries_.find(n);
    if (it == entries_.end()) {
        throw CalibrationError("no calibration entry for n=" + std::to_string(n));
    }
    return it->second;
}

CalibrationTable load_calibration(std::istream& in) {
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw CalibrationError(std::string("calibration parse error: ") + e.what());
    }
    if (!doc.is_array()) {
        throw CalibrationError("calibration document must be a JSON array of records");
    }
    CalibrationTable table;
    for (const auto& rec : doc) {
        if (!rec.is_object() || !rec.contains("n") || !rec.contains("offset") || !rec.contains("contrast")) {
            throw CalibrationError("calibration record must be an object with fields n, offset, contrast");
        }
        if (rec.size() != 3) {
            throw CalibrationError("calibration record has unknown extra fields");
        }
        if (!rec["n"].is_number_integer()) {
            throw CalibrationError("calibration field n must be an integer");
        }
        const int n = rec["n"].get<int>();
        const double offset = rec["offset"].get<double>();
        const double contrast = rec["contrast"].get<double>();
        table.insert(FringeModel(n, offset, contrast));
    }
    return table;
}

void write_calibration(std::ostream& out, const CalibrationTable& table) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& [n, model] : table.entries()) {
        doc.push_back({{"n", n}, {"offset", model.offset()}, {"contrast", model.contrast()}});
    }
    out << doc.dump(2) << "\n";
}

ModelSource ModelSource::ideal() {
    return ModelSource();
}

ModelSource ModelSource::calibrated(CalibrationTable table) {
    ModelSource src;
    src.table_ = std::move(table);
    return src;
}

FringeModel ModelSource::model_for(int n) const {
    if (table_.has_value()) {
        return table_->at(n);
    }
    return FringeModel::ideal(n);
}

}  // namespace noonsim

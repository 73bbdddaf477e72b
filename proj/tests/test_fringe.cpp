#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "noonsim/fringe.hpp"

using namespace noonsim;

namespace {

// Deterministic unit doubles; mt19937_64 output is fully specified by the
// standard, the bit-to-double conversion is ours.
struct TestRng {
    std::mt19937_64 eng;
    explicit TestRng(std::uint64_t seed) : eng(seed) {}
    double unit() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }
    double phase() { return (unit() * 2.0 - 1.0) * 3.141592653589793; }
};

}  // namespace

TEST_CASE("ideal fringe law at reference points") {
    CHECK(prob_yes(FringeModel::ideal(1), 0.0) == 1.0);
    CHECK(prob_yes(FringeModel::ideal(2), 1.5707963267948966) <= 1e-15);
    CHECK(prob_yes(FringeModel(3, 0.5, 0.8), 0.0) == doctest::Approx(0.9).epsilon(1e-15));
    // first orthogonality point of the six-particle cat
    CHECK(prob_yes(FringeModel::ideal(6), 3.141592653589793 / 6.0) <= 1e-15);
}

TEST_CASE("yes and no probabilities sum to one exactly") {
    TestRng rng(0xF12345);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 1 + static_cast<int>(rng.unit() * 20);
        const double contrast = rng.unit();
        const double offset = contrast / 2.0 + (1.0 - contrast) * rng.unit();
        const FringeModel model(n, offset, contrast);
        const double theta = rng.phase();
        CHECK(prob_yes(model, theta) + prob_no(model, theta) == 1.0);
        CHECK(prob_yes(model, theta) >= 0.0);
        CHECK(prob_yes(model, theta) <= 1.0);
    }
}

TEST_CASE("fringe is 2*pi/N periodic") {
    TestRng rng(0xBEE5);
    for (int n = 1; n <= 20; ++n) {
        const FringeModel model = FringeModel::ideal(n);
        for (int trial = 0; trial < 50; ++trial) {
            const double theta = rng.phase();
            const double period = 2.0 * 3.141592653589793 / n;
            CHECK(std::abs(prob_yes(model, theta + period) - prob_yes(model, theta)) <= 1e-12);
        }
    }
}

TEST_CASE("state-vector oracle agrees with the closed form") {
    CHECK(noon_overlap_oracle(1, 3.141592653589793) <= 1e-15);
    CHECK(noon_overlap_oracle(4, 3.141592653589793 / 4.0) <= 1e-15);
    // amplitude evolution and cos^2(N theta / 2) evaluated independently
    const double expected = std::cos(0.75) * std::cos(0.75);
    CHECK(noon_overlap_oracle(5, 0.3) == doctest::Approx(expected).epsilon(1e-14));

    TestRng rng(0x9A7E);
    for (int n = 1; n <= 20; ++n) {
        const FringeModel model = FringeModel::ideal(n);
        for (int trial = 0; trial < 1000; ++trial) {
            const double theta = rng.phase();
            CHECK(std::abs(noon_overlap_oracle(n, theta) - prob_yes(model, theta)) <= 1e-12);
        }
    }
}

TEST_CASE("contrast degradation is monotone at half offset") {
    TestRng rng(0xC0FFEE);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng.unit() * 10);
        double theta = rng.phase();
        if (std::abs(std::cos(n * theta)) <= 1e-6) {
            theta += 0.1;
        }
        double previous = -1.0;
        for (double contrast : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
            const double distance = std::abs(prob_yes(FringeModel(n, 0.5, contrast), theta) - 0.5);
            CHECK(distance > previous);
            previous = distance;
        }
    }
}

TEST_CASE("fringe model validation") {
    CHECK_THROWS_AS(FringeModel(0, 0.5, 1.0), CalibrationError);
    CHECK_THROWS_AS(FringeModel(2, 0.5, -0.1), CalibrationError);
    CHECK_THROWS_AS(FringeModel(2, 0.4, 1.0), CalibrationError);   // A - C/2 < 0
    CHECK_THROWS_AS(FringeModel(2, 0.7, 0.8), CalibrationError);   // A + C/2 > 1
    CHECK_NOTHROW(FringeModel(2, 0.5, 1.0));
    CHECK_NOTHROW(FringeModel(2, 0.6, 0.8));
    const FringeModel ideal = FringeModel::ideal(7);
    CHECK(ideal.offset() == 0.5);
    CHECK(ideal.contrast() == 1.0);
    CHECK(ideal.n_particles() == 7);
}

TEST_CASE("calibration table round trip and validation") {
    SUBCASE("single entry round trips") {
        std::istringstream in(R"([{"n": 1, "offset": 0.5, "contrast": 0.98}])");
        const CalibrationTable table = load_calibration(in);
        CHECK(table.size() == 1);
        CHECK(table.at(1).contrast() == doctest::Approx(0.98));

        std::ostringstream out;
        write_calibration(out, table);
        std::istringstream back(out.str());
        const CalibrationTable again = load_calibration(back);
        CHECK(again.size() == 1);
        CHECK(again.at(1).offset() == table.at(1).offset());
        CHECK(again.at(1).contrast() == table.at(1).contrast());
    }

    SUBCASE("probability-bound violation names the offending entry") {
        std::istringstream in(R"([{"n": 2, "offset": 0.5, "contrast": 1.2}])");
        CHECK_THROWS_WITH_AS(load_calibration(in), doctest::Contains("n=2"), CalibrationError);
    }

    SUBCASE("empty document gives an empty table that refuses lookups") {
        std::istringstream in("[]");
        const CalibrationTable table = load_calibration(in);
        CHECK(table.empty());
        CHECK_THROWS_AS(table.at(1), CalibrationError);
        CHECK_THROWS_AS(table.at(3), CalibrationError);
    }

    SUBCASE("duplicate n is a parse error") {
        std::istringstream in(
            R"([{"n": 1, "offset": 0.5, "contrast": 0.9},
                {"n": 1, "offset": 0.5, "contrast": 0.8}])");
        CHECK_THROWS_WITH_AS(load_calibration(in), doctest::Contains("duplicate"), CalibrationError);
    }

    SUBCASE("malformed documents are rejected") {
        std::istringstream not_json("offset contrast");
        CHECK_THROWS_AS(load_calibration(not_json), CalibrationError);
        std::istringstream not_array(R"({"n": 1})");
        CHECK_THROWS_AS(load_calibration(not_array), CalibrationError);
        std::istringstream missing_field(R"([{"n": 1, "offset": 0.5}])");
        CHECK_THROWS_AS(load_calibration(missing_field), CalibrationError);
        std::istringstream extra_field(R"([{"n": 1, "offset": 0.5, "contrast": 0.9, "x": 1}])");
        CHECK_THROWS_AS(load_calibration(extra_field), CalibrationError);
        std::istringstream fractional_n(R"([{"n": 1.5, "offset": 0.5, "contrast": 0.9}])");
        CHECK_THROWS_AS(load_calibration(fractional_n), CalibrationError);
    }
}

TEST_CASE("model source modes") {
    const ModelSource ideal = ModelSource::ideal();
    CHECK_FALSE(ideal.is_calibrated());
    CHECK(ideal.model_for(5).contrast() == 1.0);
    CHECK(ideal.model_for(5).n_particles() == 5);

    CalibrationTable table;
    table.insert(FringeModel(1, 0.5, 0.9));
    const ModelSource calibrated = ModelSource::calibrated(table);
    CHECK(calibrated.is_calibrated());
    CHECK(calibrated.model_for(1).contrast() == doctest::Approx(0.9));
    CHECK_THROWS_AS(calibrated.model_for(2), CalibrationError);
}

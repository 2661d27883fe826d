#include <cmath>
#include <vector>

#include "doctest.h"

#include "molink/errors.hpp"
#include "molink/precoder.hpp"
#include "molink/rng.hpp"

using namespace molink;
using namespace molink::precoder;

namespace {

channel::TapVector make_taps(std::vector<double> taps) {
    channel::TapVector tv;
    tv.taps = std::move(taps);
    tv.ts = 1.0;
    return tv;
}

// Direct convolution of the tap vector with the released sequence.
std::vector<double> convolve(const channel::TapVector& tv, const std::vector<double>& x) {
    std::vector<double> y(x.size(), 0.0);
    for (std::size_t j = 0; j < x.size(); ++j)
        for (std::size_t k = 0; k < tv.taps.size() && k <= j; ++k)
            y[j] += tv.taps[k] * x[j - k];
    return y;
}

} // namespace

TEST_SUITE("precoder") {

TEST_CASE("filter inverts a two-tap channel exactly") {
    const channel::TapVector tv = make_taps({1.0, 0.5});
    PrecoderFilter f(tv);
    const std::vector<double> targets = {1.0, 0.0, 0.0, 0.0};
    const std::vector<double> x = f.process(targets);
    CHECK(x == std::vector<double>{1.0, -0.5, 0.25, -0.125});
}

TEST_CASE("released sequence convolves back to the target sequence") {
    Rng rng(31);
    for (int rep = 0; rep < 20; ++rep) {
        const int memory = 1 + static_cast<int>(rng.uniform() * 19.0);
        std::vector<double> taps = {std::pow(10.0, -2.0 + 4.0 * rng.uniform())};
        for (int k = 0; k < memory; ++k)
            taps.push_back(taps.back() * (0.05 + 0.93 * rng.uniform()));
        const channel::TapVector tv = make_taps(taps);

        const double beta = std::pow(10.0, 15.0 + 7.0 * rng.uniform());
        std::vector<double> targets(300);
        for (auto& t : targets) t = rng.bit() ? beta : -beta;

        PrecoderFilter f(tv);
        const std::vector<double> x = f.process(targets);
        const std::vector<double> y = convolve(tv, x);
        for (std::size_t j = 0; j < targets.size(); ++j)
            CHECK(std::abs(y[j] - targets[j]) <= 1e-9 * beta);
    }
}

TEST_CASE("reset restores the zero state") {
    const channel::TapVector tv = make_taps({2.0, 1.0, 0.25});
    PrecoderFilter f(tv);
    const std::vector<double> targets = {1.0, -1.0, 1.0, 1.0};
    const std::vector<double> first = f.process(targets);
    f.reset();
    const std::vector<double> second = f.process(targets);
    CHECK(first == second);
}

TEST_CASE("tap-ratio pole bounds are exact on frozen cases") {
    const auto [lo1, hi1] = enestrom_kakeya_bounds(make_taps({1.0, 0.5}));
    CHECK(lo1 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(hi1 == doctest::Approx(0.5).epsilon(1e-15));
    const auto [lo2, hi2] = enestrom_kakeya_bounds(make_taps({4.0, 3.0, 2.0, 1.0}));
    CHECK(lo2 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(hi2 == doctest::Approx(0.75).epsilon(1e-15));
    const auto [lo3, hi3] = enestrom_kakeya_bounds(make_taps({3.0}));
    CHECK(lo3 == 0.0);
    CHECK(hi3 == 0.0);
}

TEST_CASE("computed pole moduli respect the ratio bounds") {
    const std::vector<double> poles1 = verify_poles(make_taps({1.0, 0.5}));
    REQUIRE(poles1.size() == 1);
    CHECK(poles1[0] == doctest::Approx(0.5).epsilon(1e-10));

    Rng rng(47);
    for (int rep = 0; rep < 50; ++rep) {
        const int memory = 1 + static_cast<int>(rng.uniform() * 19.0);
        std::vector<double> taps = {1.0};
        for (int k = 0; k < memory; ++k)
            taps.push_back(taps.back() * (0.05 + 0.93 * rng.uniform()));
        const channel::TapVector tv = make_taps(taps);
        const auto [lo, hi] = enestrom_kakeya_bounds(tv);
        for (const double mod : verify_poles(tv)) {
            CHECK(mod < 1.0);
            CHECK(mod >= lo - 1e-8);
            CHECK(mod <= hi + 1e-8);
        }
    }
}

TEST_CASE("power estimates match closed forms for short channels") {
    Rng rng(53);
    // Identity channel: the release equals the target.
    const PowerEstimate e1 = estimate_power(make_taps({2.0}), 6.0, 100000, rng);
    CHECK(e1.mean_abs == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(e1.mean_square == doctest::Approx(9.0).epsilon(1e-12));

    // Two taps [1, 1/2]: released power is beta^2 * sum 4^-n = 4/3 beta^2 and
    // the released magnitude is uniform on [0, 2 beta] with mean beta.
    const PowerEstimate e2 = estimate_power(make_taps({1.0, 0.5}), 5.0, 200000, rng);
    CHECK(e2.mean_square == doctest::Approx(5.0 * 5.0 * 4.0 / 3.0).epsilon(1e-12));
    CHECK(e2.mean_abs == doctest::Approx(5.0).epsilon(0.01));

    CHECK_THROWS_AS(estimate_power(make_taps({1.0, 0.5}), 5.0, 100, rng),
                    std::invalid_argument);
}

} // TEST_SUITE

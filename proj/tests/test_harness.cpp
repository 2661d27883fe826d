#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"

#include "molink/channel.hpp"
#include "molink/config.hpp"
#include "molink/errors.hpp"
#include "molink/harness.hpp"

using namespace molink;
using namespace molink::config;
using namespace molink::harness;

namespace {

ExperimentConfig ber_micro_cfg() {
    KeyValues kv = KeyValues::from_text(
        "dimension=1\ndiffusion=2.2e-9\nreceiver_distance=2.1e-7\n"
        "ts_override=6e-5\nmemory=12\nvr_cm3=5e-16\nscheme=ts_precoder\n"
        "power_is_input_beta=true\npowers=8e21\n"
        "trials=1000\nframe_length=10\nseed=1313\n");
    return build_ber_config(kv);
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("binomial interval half-width") {
    CHECK(binomial_ci95(0, 100) == 0.0);
    CHECK(binomial_ci95(50, 100) == doctest::Approx(0.098).epsilon(1e-12));
    CHECK_THROWS_AS(binomial_ci95(5, 0), std::invalid_argument);
    CHECK_THROWS_AS(binomial_ci95(-1, 10), std::invalid_argument);
    CHECK_THROWS_AS(binomial_ci95(11, 10), std::invalid_argument);
}

TEST_CASE("number formatting round-trips exactly") {
    for (const double v : {0.0, 1.0, 0.1, 2.2e-9, 714224.3341100789, -3.5e21,
                           1.0 / 3.0}) {
        const std::string s = format_number(v);
        CHECK(std::stod(s) == v);
        CHECK(format_number(v) == s);
    }
}

TEST_CASE("csv headers are stable") {
    CHECK(to_csv(std::vector<TapRow>{}).rfind("k,time,tap\n", 0) == 0);
    CHECK(to_csv(std::vector<BerPoint>{}).rfind("power,ber,ci95,errors,trials\n", 0) == 0);
    CHECK(to_csv(std::vector<QuantizerRow>{})
              .rfind("rule,levels,distortion,power,ber,ci95,errors,trials,bound_ok\n", 0) == 0);
    CHECK(to_csv(std::vector<MismatchRow>{})
              .rfind("ratio,power,ber,ci95,errors,decisions\n", 0) == 0);
    CHECK(to_csv(std::vector<ReactionRow>{})
              .rfind("zeta,zeta_tr,mean_min,mean_abs_diff,frames\n", 0) == 0);
    reaction_fdm::ProbeTraces tr;
    CHECK(to_csv(tr).rfind("t,rho_a,rho_b,diff\n", 0) == 0);
}

TEST_CASE("tap table lists one row per stored coefficient") {
    KeyValues kv = KeyValues::from_text(
        "dimension=3\ndiffusion=2.2e-9\nreceiver_distance=2.15e-7\n"
        "memory=8\nseed=1\n");
    const ExperimentConfig cfg = build_taps_config(kv);
    const auto rows = run_taps(cfg);
    REQUIRE(rows.size() == 9);
    const double ts = channel::sampling_interval(cfg.model);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].k == static_cast<int>(i));
        CHECK(rows[i].time == doctest::Approx((i + 1) * ts).epsilon(1e-12));
        if (i > 0) CHECK(rows[i].tap < rows[i - 1].tap);
        CHECK(rows[i].tap > 0.0);
    }
    CHECK(rows[0].tap ==
          doctest::Approx(channel::green_function(cfg.model, ts, 2.15e-7))
              .epsilon(1e-9));
}

TEST_CASE("precoded link hits the analytic error rate") {
    // With unit-tap targets the received mean is +-beta and the count variance
    // is beta/vr, so the decision metric is beta*vr = 8e21*5e-22 = 4 and
    // errors happen at rate Q(sqrt(4)) = 0.02275 with no ISI residue.
    const ExperimentConfig cfg = ber_micro_cfg();
    const auto pts = run_ber(cfg);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].decisions == 10000);
    CHECK(pts[0].trials == 1000);
    CHECK(std::abs(pts[0].ber - 0.0227501319) < 0.006);
    CHECK(pts[0].ci95 == binomial_ci95(pts[0].errors, pts[0].decisions));
    // Same configuration, same seed: identical output bytes.
    const auto again = run_ber(cfg);
    CHECK(to_csv(pts) == to_csv(again));
}

TEST_CASE("quantizer sweep reports reference and per-size rows") {
    KeyValues kv = KeyValues::from_text(
        "dimension=1\ndiffusion=2.2e-9\nreceiver_distance=2.15e-7\n"
        "memory=10\nvr_cm3=5e-16\nscheme=ts_precoder\n"
        "power_is_input_beta=true\npowers=2e21\ntrials=1000\nframe_length=10\n"
        "quantizer_levels_list=4,16\nquantizer_training_samples=20000\nseed=4\n");
    const ExperimentConfig cfg = build_quantizer_config(kv);
    const auto rows = run_quantizer(cfg);
    REQUIRE(rows.size() == 5); // none, then lloyd+uniform per size
    CHECK(rows[0].rule == "none");
    CHECK(rows[0].levels == 0);
    CHECK(rows[0].distortion == 0.0);
    CHECK(rows[1].rule == "lloyd");
    CHECK(rows[1].levels == 4);
    CHECK(rows[2].rule == "uniform");
    CHECK(rows[2].levels == 4);
    CHECK(rows[3].levels == 16);
    for (const auto& r : rows) {
        CHECK(r.bound_ok);
        CHECK(r.point.decisions == 10000);
    }
    // The trained quantizer never does worse than the even grid it starts from.
    CHECK(rows[1].distortion <= rows[2].distortion * (1.0 + 1e-9));
    CHECK(rows[3].distortion <= rows[4].distortion * (1.0 + 1e-9));
    // More levels, less distortion.
    CHECK(rows[3].distortion <= rows[1].distortion);
    CHECK(rows[4].distortion <= rows[2].distortion);
}

TEST_CASE("mismatch sweep pairs noise draws across ratios") {
    KeyValues kv = KeyValues::from_text(
        "dimension=1\ndiffusion=2.2e-9\nreceiver_distance=2.1e-7\n"
        "ts_override=6e-5\nmemory=10\nframe_length=10\nfdm_frames=2\n"
        "trials=1000\npowers=2,4\nmismatch_ratios=1.0,0.9\nzeta_si=2.1e-2\n"
        "grid_dx=8.4e-8\nprobe_width=8.4e-8\nseed=3\n");
    const ExperimentConfig cfg = build_mismatch_config(kv);
    const auto rows = run_mismatch(cfg);
    REQUIRE(rows.size() == 4); // ratio-major, power within
    CHECK(rows[0].ratio == 1.0);
    CHECK(rows[0].power == 2.0);
    CHECK(rows[1].ratio == 1.0);
    CHECK(rows[1].power == 4.0);
    CHECK(rows[2].ratio == 0.9);
    for (const auto& r : rows) {
        CHECK(r.decisions == 2L * 1000L * 10L);
        CHECK(r.ber >= 0.0);
        CHECK(r.ber <= 1.0);
    }
    // More receiver power, fewer errors; the gap dwarfs the Monte Carlo noise.
    CHECK(rows[1].ber <= rows[0].ber);
    CHECK(rows[3].ber <= rows[2].ber);
    const auto again = run_mismatch(cfg);
    CHECK(to_csv(rows) == to_csv(again));
}

TEST_CASE("reaction study output shape and trends") {
    // Built directly so the frame budget can stay unit-test sized.
    ExperimentConfig cfg;
    cfg.model.dimension = 1;
    cfg.model.diffusion = 2.2e-9;
    cfg.model.receiver_distance = 2.1e-7;
    cfg.ts_override = 6e-5;
    cfg.memory = 6;
    cfg.frame_slots = 6;
    cfg.fdm_frames = 8;
    cfg.grid_dx = 4.2e-8;
    cfg.probe_width = 4.2e-8;
    cfg.beta_counts = 9e4;
    cfg.zeta_list = {0.0, 0.6, 2.2};
    cfg.t_r = 1e-5;
    cfg.seed = 99;
    const auto rows = run_reaction(cfg);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].zeta == cfg.zeta_list[i]);
        CHECK(rows[i].zeta_tr == doctest::Approx(cfg.zeta_list[i] * 1e-5));
        CHECK(rows[i].frames == 8);
        CHECK(rows[i].mean_min > 0.0);
        CHECK(rows[i].mean_abs_diff == rows[0].mean_abs_diff); // rate-free stat
        if (i > 0) CHECK(rows[i].mean_min <= rows[i - 1].mean_min);
    }
    // The transmitter aims the net count at +-beta; the realized mean
    // magnitude should land in that neighborhood.
    CHECK(rows[0].mean_abs_diff == doctest::Approx(9e4).epsilon(0.2));

    const auto tr = run_reaction_trace(cfg);
    REQUIRE(tr.time.size() == 151);
    REQUIRE(tr.rho_a.size() == 151);
    for (std::size_t i = 1; i < tr.time.size(); ++i)
        CHECK(tr.time[i] > tr.time[i - 1]);
    for (std::size_t i = 0; i < tr.time.size(); ++i)
        CHECK(tr.diff[i] == tr.rho_a[i] - tr.rho_b[i]);
}

} // TEST_SUITE

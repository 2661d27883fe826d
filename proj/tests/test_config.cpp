#include <string>

#include "doctest.h"

#include "molink/config.hpp"
#include "molink/errors.hpp"

using namespace molink;
using namespace molink::config;

namespace {

// Minimal valid text for the link-level builder; tests mutate from here.
std::string ber_text() {
    return "dimension=1\n"
           "diffusion=2.2e-9\n"
           "receiver_distance=2.1e-7\n"
           "memory=10\n"
           "vr_cm3=5e-16\n"
           "scheme=ts_precoder\n"
           "powers=1e21,2e21\n"
           "trials=1000\n"
           "frame_length=50\n"
           "seed=7\n";
}

} // namespace

TEST_SUITE("config") {

TEST_CASE("parser reads comments, blanks and typed values") {
    KeyValues kv = KeyValues::from_text(
        "# leading comment\n"
        "alpha = 3.5   # trailing comment\n"
        "\n"
        "count=2e5\n"
        "flag = true\n"
        "name= hello\n"
        "list=1,2.5, 4\n");
    CHECK(kv.get_double("alpha") == 3.5);
    CHECK(kv.get_long("count") == 200000); // integral scientific form accepted
    CHECK(kv.get_bool("flag", false));
    CHECK(kv.get_string("name") == "hello");
    const auto xs = kv.get_double_list("list");
    REQUIRE(xs.size() == 3);
    CHECK(xs[1] == 2.5);
    CHECK_NOTHROW(kv.reject_unused());
}

TEST_CASE("parser rejects malformed and duplicate input") {
    CHECK_THROWS_AS(KeyValues::from_text("a=1\na=2\n"), ConfigError);
    CHECK_THROWS_AS(KeyValues::from_text("just words\n"), ConfigError);
    CHECK_THROWS_AS(KeyValues::from_text("=3\n"), ConfigError);
    KeyValues kv = KeyValues::from_text("x=abc\n");
    CHECK_THROWS_AS(kv.get_double("x"), ConfigError);
    KeyValues kv2 = KeyValues::from_text("x=2.7\n");
    CHECK_THROWS_AS(kv2.get_long("x"), ConfigError);
    KeyValues kv3 = KeyValues::from_text("x=1\n");
    CHECK_THROWS_AS(kv3.get_double("missing"), ConfigError);
}

TEST_CASE("unread keys are flagged and fallbacks do not mask them") {
    KeyValues kv = KeyValues::from_text("known=1\nstray=2\n");
    CHECK(kv.get_double("known") == 1.0);
    CHECK_THROWS_AS(kv.reject_unused(), ConfigError);
    CHECK(kv.get_double("stray") == 2.0);
    CHECK_NOTHROW(kv.reject_unused());
}

TEST_CASE("command line overrides replace file values") {
    KeyValues kv = KeyValues::from_text("powers=1e21\nseed=3\n");
    apply_override(kv, "powers=5e20,6e20");
    apply_override(kv, "extra=9");
    CHECK(kv.get_double_list("powers") == std::vector<double>{5e20, 6e20});
    CHECK(kv.get_u64("seed") == 3);
    CHECK(kv.get_double("extra") == 9.0);
    CHECK_THROWS_AS(apply_override(kv, "no_equals_sign"), ConfigError);
}

TEST_CASE("scheme names round-trip") {
    for (const auto v : {SchemeVariant::ts_precoder, SchemeVariant::csk_nomem,
                         SchemeVariant::csk_genie, SchemeVariant::mcsk_nomem,
                         SchemeVariant::mcsk_genie}) {
        CHECK(parse_scheme(scheme_name(v)) == v);
    }
    CHECK_THROWS_AS(parse_scheme("qam"), ConfigError);
}

TEST_CASE("link builder fills the experiment and enforces ranges") {
    KeyValues kv = KeyValues::from_text(ber_text());
    const ExperimentConfig cfg = build_ber_config(kv);
    CHECK(cfg.model.dimension == 1);
    CHECK(cfg.memory == 10);
    CHECK(cfg.vr == doctest::Approx(5e-22)); // cm^3 converted to m^3
    CHECK(cfg.powers.size() == 2);
    CHECK(cfg.trials == 1000);
    CHECK(cfg.seed == 7);
    CHECK_FALSE(cfg.power_is_input_beta);

    const auto reject = [](const std::string& from, const std::string& to) {
        std::string text = ber_text();
        const auto pos = text.find(from);
        REQUIRE(pos != std::string::npos);
        text.replace(pos, from.size(), to);
        KeyValues bad = KeyValues::from_text(text);
        CHECK_THROWS_AS(build_ber_config(bad), ConfigError);
    };
    reject("trials=1000", "trials=999");
    reject("powers=1e21,2e21", "powers=1e21,0");
    reject("memory=10", "memory=0");            // no epsilon supplied either
    reject("vr_cm3=5e-16", "vr_rubbish=5e-16"); // unknown key
    reject("scheme=ts_precoder", "scheme=fm");
    reject("dimension=1", "dimension=2");
    reject("seed=7", "note=7"); // seed is mandatory

    // memory and epsilon are mutually exclusive.
    std::string both = ber_text() + "epsilon=0.01\n";
    KeyValues kb = KeyValues::from_text(both);
    CHECK_THROWS_AS(build_ber_config(kb), ConfigError);

    // vr must come from exactly one unit.
    std::string two_vr = ber_text() + "vr_m3=5e-22\n";
    KeyValues kvr = KeyValues::from_text(two_vr);
    CHECK_THROWS_AS(build_ber_config(kvr), ConfigError);
}

TEST_CASE("epsilon path replaces an explicit tap count") {
    std::string text = ber_text();
    const auto pos = text.find("memory=10");
    text.replace(pos, 9, "epsilon=0.01");
    KeyValues kv = KeyValues::from_text(text);
    const ExperimentConfig cfg = build_ber_config(kv);
    CHECK(cfg.memory == 0);
    CHECK(cfg.epsilon == 0.01);
}

TEST_CASE("broken channel geometry surfaces as a config error") {
    std::string text = ber_text();
    const auto pos = text.find("diffusion=2.2e-9");
    text.replace(pos, 16, "diffusion=-1e-9");
    KeyValues kv = KeyValues::from_text(text);
    CHECK_THROWS_AS(build_ber_config(kv), ConfigError);
}

TEST_CASE("quantizer builder wants one power and sane level counts") {
    const std::string text =
        "dimension=1\ndiffusion=2.2e-9\nreceiver_distance=2.15e-7\n"
        "memory=10\nvr_cm3=5e-16\nscheme=ts_precoder\n"
        "power_is_input_beta=true\npowers=2e21\ntrials=1000\nframe_length=10\n"
        "quantizer_levels_list=4,16\nquantizer_training_samples=20000\nseed=4\n";
    KeyValues kv = KeyValues::from_text(text);
    const ExperimentConfig cfg = build_quantizer_config(kv);
    CHECK(cfg.quantizer_levels == std::vector<long>{4, 16});
    CHECK(cfg.power_is_input_beta);

    const auto reject = [&](const std::string& from, const std::string& to) {
        std::string t = text;
        const auto pos = t.find(from);
        REQUIRE(pos != std::string::npos);
        t.replace(pos, from.size(), to);
        KeyValues bad = KeyValues::from_text(t);
        CHECK_THROWS_AS(build_quantizer_config(bad), ConfigError);
    };
    reject("powers=2e21", "powers=2e21,3e21");
    reject("quantizer_levels_list=4,16", "quantizer_levels_list=1,16");
    reject("quantizer_training_samples=20000", "quantizer_training_samples=100");
    reject("scheme=ts_precoder", "scheme=csk_genie");
}

TEST_CASE("mismatch builder pins the reference ratio and the interval") {
    const std::string text =
        "dimension=1\ndiffusion=2.2e-9\nreceiver_distance=2.1e-7\n"
        "ts_override=6e-5\nmemory=10\nframe_length=20\nfdm_frames=3\n"
        "trials=1000\npowers=2\nmismatch_ratios=1.0,0.9\nzeta_si=2.1e-2\n"
        "grid_dx=8.4e-8\nprobe_width=8.4e-8\nseed=3\n";
    KeyValues kv = KeyValues::from_text(text);
    const ExperimentConfig cfg = build_mismatch_config(kv);
    CHECK(cfg.ts_override == 6e-5);
    CHECK(cfg.mismatch_ratios.front() == 1.0);
    CHECK(cfg.fdm_frames == 3);

    const auto reject = [&](const std::string& from, const std::string& to) {
        std::string t = text;
        const auto pos = t.find(from);
        REQUIRE(pos != std::string::npos);
        t.replace(pos, from.size(), to);
        KeyValues bad = KeyValues::from_text(t);
        CHECK_THROWS_AS(build_mismatch_config(bad), ConfigError);
    };
    reject("mismatch_ratios=1.0,0.9", "mismatch_ratios=0.9,1.1"); // no unit ratio
    reject("ts_override=6e-5", "ts_override=0");
    reject("grid_dx=8.4e-8", "grid_dx=0");
    reject("zeta_si=2.1e-2", "zeta_si=-1");
}

TEST_CASE("reaction builder needs a long frame budget") {
    const std::string text =
        "dimension=1\ndiffusion=2.2e-9\nreceiver_distance=2.1e-7\n"
        "ts_override=6e-5\nmemory=8\nframe_slots=8\nfdm_frames=200\n"
        "grid_dx=4.2e-8\nprobe_width=4.2e-8\nbeta=9e4\nzeta_list=0,2.2\n"
        "t_r=1e-5\nseed=5\n";
    KeyValues kv = KeyValues::from_text(text);
    const ExperimentConfig cfg = build_reaction_config(kv);
    CHECK(cfg.beta_counts == 9e4);
    CHECK(cfg.zeta_list == std::vector<double>{0.0, 2.2});
    CHECK(cfg.trace_amount == 3e6); // defaults hold
    CHECK(cfg.trace_zeta == 10.0);

    std::string short_run = text;
    const auto pos = short_run.find("fdm_frames=200");
    short_run.replace(pos, 14, "fdm_frames=50");
    KeyValues bad = KeyValues::from_text(short_run);
    CHECK_THROWS_AS(build_reaction_config(bad), ConfigError);
}

TEST_CASE("taps builder accepts a rectangular release") {
    KeyValues kv = KeyValues::from_text(
        "dimension=3\ndiffusion=2.2e-9\nreceiver_distance=2.15e-7\n"
        "memory=8\nrelease_mode=rectangular\nrelease_width=1e-5\nseed=1\n");
    const ExperimentConfig cfg = build_taps_config(kv);
    CHECK(cfg.model.dimension == 3);
    CHECK(cfg.model.release_width == 1e-5);
}

} // TEST_SUITE

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "molink/channel.hpp"

namespace molink::config {

// Flat key=value store parsed from a config file. Getters mark keys as
// consumed; reject_unused() then refuses any leftover (unknown) key, and the
// parser refuses duplicates, so typos fail loudly instead of being ignored.
class KeyValues {
public:
    static KeyValues from_file(const std::string& path);
    static KeyValues from_text(const std::string& text);

    // Command-line override: replaces (or introduces) a value before the
    // experiment builder consumes it.
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key);
    std::string get_string(const std::string& key, const std::string& fallback);
    double get_double(const std::string& key);
    double get_double(const std::string& key, double fallback);
    long get_long(const std::string& key);
    long get_long(const std::string& key, long fallback);
    std::uint64_t get_u64(const std::string& key);
    bool get_bool(const std::string& key, bool fallback);
    std::vector<double> get_double_list(const std::string& key);
    std::vector<long> get_long_list(const std::string& key);

    void reject_unused() const;

private:
    std::map<std::string, std::string> values_;
    std::set<std::string> used_;
};

// "key=value" as given to --set on the command line.
void apply_override(KeyValues& kv, const std::string& assignment);

enum class SchemeVariant { ts_precoder, csk_nomem, csk_genie, mcsk_nomem, mcsk_genie };

SchemeVariant parse_scheme(const std::string& name);
std::string scheme_name(SchemeVariant scheme);

// One experiment fully described: channel geometry, power sweep, Monte Carlo
// sizes and solver controls. Each subcommand's builder fills the subset it
// needs and validates ranges; unused keys in the file are an error.
struct ExperimentConfig {
    // channel
    channel::ChannelModel model;
    double ts_override = 0.0; // 0 selects the peak-aligned interval
    int memory = 0;           // taps beyond the current slot; 0 defers to epsilon
    double epsilon = 0.0;     // relative tail threshold when memory == 0

    // receiver noise
    double vr = 0.0; // receiver volume, m^3

    // link-level Monte Carlo
    SchemeVariant scheme = SchemeVariant::ts_precoder;
    std::vector<double> powers;
    bool power_is_input_beta = false; // feed powers to the precoder directly
    long trials = 0;
    long frame_length = 0;

    // quantizer sweep
    std::vector<long> quantizer_levels;
    long quantizer_training_samples = 200000;
    double quantizer_tol = 1e-6;
    long quantizer_max_iter = 500;

    // finite-difference runs
    double grid_dx = 0.0;
    double grid_xmax = 0.0;
    double cfl = 0.25;
    double substep_eta = 0.1;
    double probe_width = 0.0;
    double zeta_si = 0.0;                // m/s, mismatch runs
    std::vector<double> mismatch_ratios; // d_b / d_a
    long fdm_frames = 0;
    long frame_slots = 0;

    // reaction study: per-count rates applied to probe counts over t_r
    double beta_counts = 0.0;
    std::vector<double> zeta_list;
    double t_r = 0.0;
    double trace_amount = 3e6;
    double trace_zeta = 10.0;

    std::uint64_t seed = 0;
};

ExperimentConfig build_taps_config(KeyValues& kv);
ExperimentConfig build_ber_config(KeyValues& kv);
ExperimentConfig build_quantizer_config(KeyValues& kv);
ExperimentConfig build_mismatch_config(KeyValues& kv);
ExperimentConfig build_reaction_config(KeyValues& kv);

} // namespace molink::config

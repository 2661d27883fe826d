#include "molink/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "molink/errors.hpp"

namespace molink::config {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v))
        throw ConfigError("key '" + key + "': '" + text + "' is not a finite number");
    return v;
}

long parse_long(const std::string& key, const std::string& text) {
    long v = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        // Accept integer-valued scientific notation (2e5) for counts.
        const double d = parse_double(key, text);
        if (std::abs(d) > 9.0e18 || d != std::floor(d))
            throw ConfigError("key '" + key + "': '" + text + "' is not an integer");
        return static_cast<long>(d);
    }
    return v;
}

std::vector<std::string> split_list(const std::string& key, const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(text);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError("key '" + key + "': empty list entry");
        out.push_back(item);
    }
    if (out.empty()) throw ConfigError("key '" + key + "': empty list");
    return out;
}

} // namespace

KeyValues KeyValues::from_text(const std::string& text) {
    KeyValues kv;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || key.find_first_of(" \t") != std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": malformed key");
        if (value.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": key '" + key +
                              "' has no value");
        if (!kv.values_.emplace(key, value).second)
            throw ConfigError("duplicate key '" + key + "'");
    }
    return kv;
}

KeyValues KeyValues::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_text(buffer.str());
}

void KeyValues::set(const std::string& key, const std::string& value) {
    const std::string k = trim(key);
    const std::string v = trim(value);
    if (k.empty() || v.empty()) throw ConfigError("override needs a key and a value");
    values_[k] = v;
}

bool KeyValues::has(const std::string& key) const { return values_.count(key) > 0; }

std::string KeyValues::get_string(const std::string& key) {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing required key '" + key + "'");
    used_.insert(key);
    return it->second;
}

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    return get_string(key);
}

double KeyValues::get_double(const std::string& key) {
    return parse_double(key, get_string(key));
}

double KeyValues::get_double(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return get_double(key);
}

long KeyValues::get_long(const std::string& key) {
    return parse_long(key, get_string(key));
}

long KeyValues::get_long(const std::string& key, long fallback) {
    if (!has(key)) return fallback;
    return get_long(key);
}

std::uint64_t KeyValues::get_u64(const std::string& key) {
    const std::string text = get_string(key);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ConfigError("key '" + key + "': '" + text + "' is not an unsigned integer");
    return v;
}

bool KeyValues::get_bool(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const std::string text = get_string(key);
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ConfigError("key '" + key + "': expected true or false");
}

std::vector<double> KeyValues::get_double_list(const std::string& key) {
    std::vector<double> out;
    for (const auto& item : split_list(key, get_string(key)))
        out.push_back(parse_double(key, item));
    return out;
}

std::vector<long> KeyValues::get_long_list(const std::string& key) {
    std::vector<long> out;
    for (const auto& item : split_list(key, get_string(key)))
        out.push_back(parse_long(key, item));
    return out;
}

void KeyValues::reject_unused() const {
    std::string leftover;
    for (const auto& [key, value] : values_) {
        if (used_.count(key)) continue;
        if (!leftover.empty()) leftover += ", ";
        leftover += key;
    }
    if (!leftover.empty())
        throw ConfigError("unknown key(s) for this subcommand: " + leftover);
}

void apply_override(KeyValues& kv, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("--set expects key=value, got '" + assignment + "'");
    kv.set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

SchemeVariant parse_scheme(const std::string& name) {
    if (name == "ts_precoder") return SchemeVariant::ts_precoder;
    if (name == "csk_nomem") return SchemeVariant::csk_nomem;
    if (name == "csk_genie") return SchemeVariant::csk_genie;
    if (name == "mcsk_nomem") return SchemeVariant::mcsk_nomem;
    if (name == "mcsk_genie") return SchemeVariant::mcsk_genie;
    throw ConfigError("unknown scheme '" + name + "'");
}

std::string scheme_name(SchemeVariant scheme) {
    switch (scheme) {
    case SchemeVariant::ts_precoder: return "ts_precoder";
    case SchemeVariant::csk_nomem: return "csk_nomem";
    case SchemeVariant::csk_genie: return "csk_genie";
    case SchemeVariant::mcsk_nomem: return "mcsk_nomem";
    case SchemeVariant::mcsk_genie: return "mcsk_genie";
    }
    throw ConfigError("unknown scheme value");
}

namespace {

void read_channel(KeyValues& kv, ExperimentConfig& cfg) {
    cfg.model.dimension = static_cast<int>(kv.get_long("dimension", 1));
    cfg.model.diffusion = kv.get_double("diffusion");
    cfg.model.receiver_distance = kv.get_double("receiver_distance");
    const std::string mode = kv.get_string("release_mode", "impulse");
    if (mode == "impulse") {
        cfg.model.release_mode = channel::ReleaseMode::impulse;
    } else if (mode == "rectangular") {
        cfg.model.release_mode = channel::ReleaseMode::rectangular;
        cfg.model.release_width = kv.get_double("release_width");
    } else {
        throw ConfigError("release_mode must be impulse or rectangular");
    }
    try {
        cfg.model.validate();
    } catch (const ModelError& e) {
        throw ConfigError(e.what());
    }
    cfg.ts_override = kv.get_double("ts_override", 0.0);
    if (cfg.ts_override < 0.0) throw ConfigError("ts_override must be non-negative");
}

void read_memory(KeyValues& kv, ExperimentConfig& cfg) {
    cfg.memory = static_cast<int>(kv.get_long("memory", 0));
    cfg.epsilon = kv.get_double("epsilon", 0.0);
    if (cfg.memory < 0) throw ConfigError("memory must be non-negative");
    if (cfg.epsilon < 0.0 || cfg.epsilon >= 1.0)
        throw ConfigError("epsilon must lie in [0, 1)");
    if ((cfg.memory == 0) == (cfg.epsilon == 0.0))
        throw ConfigError("give exactly one of memory or epsilon");
}

void read_volume(KeyValues& kv, ExperimentConfig& cfg) {
    const bool cm = kv.has("vr_cm3");
    const bool m = kv.has("vr_m3");
    if (cm == m) throw ConfigError("give exactly one of vr_cm3 or vr_m3");
    cfg.vr = cm ? kv.get_double("vr_cm3") * 1e-6 : kv.get_double("vr_m3");
    if (!(cfg.vr > 0.0)) throw ConfigError("receiver volume must be positive");
}

void read_seed(KeyValues& kv, ExperimentConfig& cfg) { cfg.seed = kv.get_u64("seed"); }

void read_trials(KeyValues& kv, ExperimentConfig& cfg) {
    cfg.trials = kv.get_long("trials");
    if (cfg.trials < 1000) throw ConfigError("trials must be at least 1000");
}

void read_powers(KeyValues& kv, ExperimentConfig& cfg) {
    cfg.powers = kv.get_double_list("powers");
    for (const double p : cfg.powers)
        if (!(p > 0.0)) throw ConfigError("powers must be positive");
}

void read_grid(KeyValues& kv, ExperimentConfig& cfg) {
    cfg.grid_dx = kv.get_double("grid_dx");
    if (!(cfg.grid_dx > 0.0)) throw ConfigError("grid_dx must be positive");
    cfg.grid_xmax = kv.get_double("grid_xmax", 0.0);
    if (cfg.grid_xmax < 0.0) throw ConfigError("grid_xmax must be non-negative");
    cfg.cfl = kv.get_double("cfl", 0.25);
    if (!(cfg.cfl > 0.0) || cfg.cfl > 0.5) throw ConfigError("cfl must lie in (0, 0.5]");
    cfg.substep_eta = kv.get_double("substep_eta", 0.1);
    if (!(cfg.substep_eta > 0.0) || cfg.substep_eta > 1.0)
        throw ConfigError("substep_eta must lie in (0, 1]");
    cfg.probe_width = kv.get_double("probe_width");
    if (!(cfg.probe_width > 0.0)) throw ConfigError("probe_width must be positive");
}

} // namespace

ExperimentConfig build_taps_config(KeyValues& kv) {
    ExperimentConfig cfg;
    read_channel(kv, cfg);
    read_memory(kv, cfg);
    read_seed(kv, cfg);
    kv.reject_unused();
    return cfg;
}

namespace {

// Keys shared by the link-level Monte Carlo subcommands (ber, quantizer).
ExperimentConfig read_link_config(KeyValues& kv) {
    ExperimentConfig cfg;
    read_channel(kv, cfg);
    read_memory(kv, cfg);
    read_volume(kv, cfg);
    read_powers(kv, cfg);
    read_trials(kv, cfg);
    read_seed(kv, cfg);
    cfg.scheme = parse_scheme(kv.get_string("scheme"));
    cfg.power_is_input_beta = kv.get_bool("power_is_input_beta", false);
    cfg.frame_length = kv.get_long("frame_length");
    if (cfg.frame_length < 1) throw ConfigError("frame_length must be positive");
    return cfg;
}

} // namespace

ExperimentConfig build_ber_config(KeyValues& kv) {
    ExperimentConfig cfg = read_link_config(kv);
    kv.reject_unused();
    return cfg;
}

ExperimentConfig build_quantizer_config(KeyValues& kv) {
    ExperimentConfig cfg = read_link_config(kv);
    if (cfg.scheme != SchemeVariant::ts_precoder)
        throw ConfigError("quantizer runs apply to scheme=ts_precoder only");
    if (cfg.powers.size() != 1)
        throw ConfigError("quantizer runs take exactly one power");
    cfg.quantizer_levels = kv.get_long_list("quantizer_levels_list");
    for (const long m : cfg.quantizer_levels)
        if (m < 2) throw ConfigError("quantizer level counts must be at least 2");
    cfg.quantizer_training_samples = kv.get_long("quantizer_training_samples", 200000);
    long max_m = 0;
    for (const long m : cfg.quantizer_levels) max_m = std::max(max_m, m);
    if (cfg.quantizer_training_samples < 10 * max_m)
        throw ConfigError("quantizer training needs at least 10 samples per level");
    cfg.quantizer_tol = kv.get_double("quantizer_tol", 1e-6);
    if (!(cfg.quantizer_tol > 0.0)) throw ConfigError("quantizer_tol must be positive");
    cfg.quantizer_max_iter = kv.get_long("quantizer_max_iter", 500);
    if (cfg.quantizer_max_iter < 1)
        throw ConfigError("quantizer_max_iter must be positive");
    kv.reject_unused();
    return cfg;
}

ExperimentConfig build_mismatch_config(KeyValues& kv) {
    ExperimentConfig cfg;
    read_channel(kv, cfg);
    if (cfg.model.dimension != 1)
        throw ConfigError("mismatch runs solve a 1-D grid; dimension must be 1");
    if (!(cfg.ts_override > 0.0))
        throw ConfigError("mismatch runs need an explicit ts_override");
    cfg.memory = static_cast<int>(kv.get_long("memory"));
    if (cfg.memory < 1) throw ConfigError("memory must be at least 1");
    read_powers(kv, cfg);
    read_trials(kv, cfg);
    read_grid(kv, cfg);
    read_seed(kv, cfg);
    cfg.frame_length = kv.get_long("frame_length");
    if (cfg.frame_length < 1) throw ConfigError("frame_length must be positive");
    cfg.fdm_frames = kv.get_long("fdm_frames");
    if (cfg.fdm_frames < 1) throw ConfigError("fdm_frames must be positive");
    cfg.mismatch_ratios = kv.get_double_list("mismatch_ratios");
    bool has_matched = false;
    for (const double r : cfg.mismatch_ratios) {
        if (!(r > 0.0)) throw ConfigError("mismatch_ratios must be positive");
        if (r == 1.0) has_matched = true;
    }
    if (!has_matched)
        throw ConfigError("mismatch_ratios must include the matched ratio 1.0");
    cfg.zeta_si = kv.get_double("zeta_si");
    if (cfg.zeta_si < 0.0) throw ConfigError("zeta_si must be non-negative");
    kv.reject_unused();
    return cfg;
}

ExperimentConfig build_reaction_config(KeyValues& kv) {
    ExperimentConfig cfg;
    read_channel(kv, cfg);
    if (cfg.model.dimension != 1)
        throw ConfigError("reaction runs solve a 1-D grid; dimension must be 1");
    if (!(cfg.ts_override > 0.0))
        throw ConfigError("reaction runs need an explicit ts_override");
    cfg.memory = static_cast<int>(kv.get_long("memory"));
    if (cfg.memory < 1) throw ConfigError("memory must be at least 1");
    read_grid(kv, cfg);
    read_seed(kv, cfg);
    cfg.frame_slots = kv.get_long("frame_slots");
    if (cfg.frame_slots < 1) throw ConfigError("frame_slots must be positive");
    cfg.fdm_frames = kv.get_long("fdm_frames");
    if (cfg.fdm_frames < 200)
        throw ConfigError("reaction statistics need at least 200 frames");
    cfg.beta_counts = kv.get_double("beta");
    if (!(cfg.beta_counts > 0.0)) throw ConfigError("beta must be positive");
    cfg.zeta_list = kv.get_double_list("zeta_list");
    for (const double z : cfg.zeta_list)
        if (z < 0.0) throw ConfigError("zeta_list entries must be non-negative");
    cfg.t_r = kv.get_double("t_r");
    if (!(cfg.t_r > 0.0)) throw ConfigError("t_r must be positive");
    cfg.trace_amount = kv.get_double("trace_amount", 3e6);
    if (!(cfg.trace_amount > 0.0)) throw ConfigError("trace_amount must be positive");
    cfg.trace_zeta = kv.get_double("trace_zeta", 10.0);
    if (cfg.trace_zeta < 0.0) throw ConfigError("trace_zeta must be non-negative");
    kv.reject_unused();
    return cfg;
}

} // namespace molink::config

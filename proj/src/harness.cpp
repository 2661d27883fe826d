#include "molink/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "molink/errors.hpp"
#include "molink/modulation.hpp"
#include "molink/precoder.hpp"
#include "molink/quantizer.hpp"
#include "molink/receiver.hpp"
#include "molink/rng.hpp"

namespace molink::harness {

namespace {

// Child-stream indices off the root generator. Keeping the map fixed makes
// every experiment reproducible from the single config seed and lets paired
// runs (same trials, different detector or quantizer) share noise.
constexpr std::uint64_t kStreamTrials = 0;
constexpr std::uint64_t kStreamPowerCal = 1;
constexpr std::uint64_t kStreamTraining = 2;
constexpr std::uint64_t kStreamFdmNoise = 3;
constexpr std::uint64_t kStreamFrameBits = 4;

struct LinkSetup {
    channel::TapVector taps; // physical units
    double ts = 0.0;
    int memory = 0;
};

LinkSetup make_link(const config::ExperimentConfig& cfg) {
    LinkSetup link;
    link.ts = cfg.ts_override > 0.0 ? cfg.ts_override
                                    : channel::sampling_interval(cfg.model);
    link.memory = cfg.memory > 0
                      ? cfg.memory
                      : channel::memory_length(cfg.model, cfg.epsilon, link.ts);
    link.taps = channel::taps_at(cfg.model, link.memory, link.ts);
    return link;
}

// The Monte Carlo compares schemes at equal mean released mass, which is
// invariant under a common tap rescale; running on unit-peak taps keeps the
// observation scale equal to the release scale.
channel::TapVector normalize_taps(const channel::TapVector& taps) {
    channel::TapVector norm = taps;
    const double p0 = norm.taps[0];
    for (double& t : norm.taps) t /= p0;
    norm.validate();
    return norm;
}

modulation::Scheme modulation_of(config::SchemeVariant scheme) {
    switch (scheme) {
    case config::SchemeVariant::ts_precoder: return modulation::Scheme::ts;
    case config::SchemeVariant::csk_nomem:
    case config::SchemeVariant::csk_genie: return modulation::Scheme::csk;
    case config::SchemeVariant::mcsk_nomem:
    case config::SchemeVariant::mcsk_genie: return modulation::Scheme::mcsk;
    }
    throw ContractViolation("unhandled scheme");
}

// Input amplitude realizing the requested power: either the raw precoder
// target, or the fair-power scale where every scheme releases `power` mean
// mass per slot.
double input_amplitude(const config::ExperimentConfig& cfg,
                       const channel::TapVector& norm, double power,
                       std::uint64_t point, const Rng& root) {
    if (cfg.power_is_input_beta) return power;
    Rng cal = root.fork(kStreamPowerCal).fork(point);
    const double scale = modulation::normalize_power(modulation_of(cfg.scheme), norm,
                                                     power, power, 100000, cal);
    return power * scale;
}

struct FrameOutcome {
    long errors = 0;
    bool bound_ok = true;
};

// One transmission frame: `memory` warmup slots followed by frame_length
// decided slots, all noise draws taken in slot order from `rng`.
FrameOutcome run_frame(config::SchemeVariant scheme, const channel::TapVector& taps,
                       double amplitude, long frame_length,
                       const receiver::NoiseModel& noise,
                       const quantizer::Quantizer* quant, Rng& rng) {
    const auto& p = taps.taps;
    const int memory = taps.memory();
    const long total = frame_length + memory;

    std::vector<std::uint8_t> bits(static_cast<std::size_t>(total));
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.bit());

    FrameOutcome out;
    if (scheme == config::SchemeVariant::ts_precoder) {
        const auto frame = modulation::ts_encode(bits, amplitude);
        precoder::PrecoderFilter filter(taps);
        std::vector<double> released(static_cast<std::size_t>(total));
        double tap_sum = 0.0;
        for (const double t : p) tap_sum += t;
        double e_max = 0.0;
        for (long j = 0; j < total; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            const double x = filter.step(frame.symbols[ju]);
            const double xt = quant ? quant->quantize(x) : x;
            e_max = std::max(e_max, std::abs(x - xt));
            released[ju] = xt;
            double mean = 0.0;
            const long kmax = std::min<long>(j, memory);
            for (long k = 0; k <= kmax; ++k)
                mean += p[static_cast<std::size_t>(k)] * released[ju - static_cast<std::size_t>(k)];
            // Residual target error can only come from quantization, with
            // the filter-identity slack on top.
            if (std::abs(mean - frame.symbols[ju]) >
                tap_sum * e_max * (1.0 + 1e-9) + 1e-9 * amplitude)
                out.bound_ok = false;
            const double y = receiver::observe(mean, std::abs(mean), noise, rng);
            if (j >= memory)
                out.errors += receiver::ts_detect(y) != static_cast<int>(bits[ju]);
        }
        return out;
    }

    const bool mcsk = scheme == config::SchemeVariant::mcsk_nomem ||
                      scheme == config::SchemeVariant::mcsk_genie;
    const bool genie = scheme == config::SchemeVariant::csk_genie ||
                       scheme == config::SchemeVariant::mcsk_genie;
    const int lag_step = mcsk ? 2 : 1;
    std::vector<double> released(static_cast<std::size_t>(total));
    for (long j = 0; j < total; ++j)
        released[static_cast<std::size_t>(j)] =
            bits[static_cast<std::size_t>(j)] ? amplitude : 0.0;
    for (long j = 0; j < total; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        // On-off amplitudes; alternating molecule types only interfere at
        // even lags, so the probed same-type mean skips odd ones.
        double mean = 0.0;
        const long kmax = std::min<long>(j, memory);
        for (long k = 0; k <= kmax; k += lag_step)
            mean += p[static_cast<std::size_t>(k)] * released[ju - static_cast<std::size_t>(k)];
        const double y = receiver::observe(mean, mean, noise, rng);
        const double isi = genie ? mean - p[0] * released[ju] : 0.0;
        if (j >= memory)
            out.errors += receiver::map_detect_genie(y, isi, p[0], amplitude, noise.vr) !=
                          static_cast<int>(bits[ju]);
    }
    return out;
}

struct PointOutcome {
    BerPoint point;
    bool bound_ok = true;
};

PointOutcome run_point(const config::ExperimentConfig& cfg,
                       const channel::TapVector& norm, double power,
                       std::uint64_t point_idx, const Rng& root,
                       const quantizer::Quantizer* quant) {
    receiver::NoiseModel noise;
    noise.vr = cfg.vr;
    noise.regime = cfg.scheme == config::SchemeVariant::ts_precoder
                       ? receiver::ReactionRegime::full_reaction
                       : receiver::ReactionRegime::no_reaction;
    noise.validate();

    const double amplitude = input_amplitude(cfg, norm, power, point_idx, root);
    const Rng trial_root = root.fork(kStreamTrials).fork(point_idx);

    PointOutcome out;
    long errors = 0;
    for (long trial = 0; trial < cfg.trials; ++trial) {
        Rng rng = trial_root.fork(static_cast<std::uint64_t>(trial));
        const FrameOutcome fo = run_frame(cfg.scheme, norm, amplitude,
                                          cfg.frame_length, noise, quant, rng);
        errors += fo.errors;
        out.bound_ok = out.bound_ok && fo.bound_ok;
    }
    const long decisions = cfg.trials * cfg.frame_length;
    out.point.power = power;
    out.point.errors = errors;
    out.point.trials = cfg.trials;
    out.point.decisions = decisions;
    out.point.ber = static_cast<double>(errors) / static_cast<double>(decisions);
    out.point.ci95 = binomial_ci95(errors, decisions);
    return out;
}

} // namespace

double binomial_ci95(long errors, long decisions) {
    if (decisions < 1) throw std::invalid_argument("ci95 needs at least one decision");
    if (errors < 0 || errors > decisions)
        throw std::invalid_argument("errors must lie in [0, decisions]");
    const double n = static_cast<double>(decisions);
    const double p = static_cast<double>(errors) / n;
    return 1.96 * std::sqrt(p * (1.0 - p) / n);
}

std::vector<TapRow> run_taps(const config::ExperimentConfig& cfg) {
    const LinkSetup link = make_link(cfg);
    std::vector<TapRow> rows;
    rows.reserve(link.taps.taps.size());
    for (std::size_t k = 0; k < link.taps.taps.size(); ++k) {
        TapRow row;
        row.k = static_cast<int>(k);
        row.time = static_cast<double>(k + 1) * link.ts;
        row.tap = link.taps.taps[k];
        rows.push_back(row);
    }
    return rows;
}

std::vector<BerPoint> run_ber(const config::ExperimentConfig& cfg) {
    const LinkSetup link = make_link(cfg);
    const channel::TapVector norm = normalize_taps(link.taps);
    const Rng root(cfg.seed);
    std::vector<BerPoint> out;
    out.reserve(cfg.powers.size());
    for (std::size_t i = 0; i < cfg.powers.size(); ++i)
        out.push_back(run_point(cfg, norm, cfg.powers[i], i, root, nullptr).point);
    return out;
}

std::vector<QuantizerRow> run_quantizer(const config::ExperimentConfig& cfg) {
    const LinkSetup link = make_link(cfg);
    const channel::TapVector norm = normalize_taps(link.taps);
    const Rng root(cfg.seed);
    const double power = cfg.powers.front();
    const double amplitude = input_amplitude(cfg, norm, power, 0, root);

    // Training set: steady-state precoder outputs under random data.
    Rng train = root.fork(kStreamTraining);
    precoder::PrecoderFilter filter(norm);
    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(cfg.quantizer_training_samples));
    for (int k = 0; k < norm.memory(); ++k)
        filter.step(train.bit() ? amplitude : -amplitude);
    for (long k = 0; k < cfg.quantizer_training_samples; ++k)
        samples.push_back(filter.step(train.bit() ? amplitude : -amplitude));
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());

    std::vector<QuantizerRow> rows;
    {
        QuantizerRow row;
        row.rule = "none";
        row.levels = 0;
        row.distortion = 0.0;
        const PointOutcome po = run_point(cfg, norm, power, 0, root, nullptr);
        row.point = po.point;
        row.bound_ok = po.bound_ok;
        rows.push_back(row);
    }
    for (const long m : cfg.quantizer_levels) {
        const quantizer::LloydResult trained =
            quantizer::lloyd(samples, static_cast<int>(m), cfg.quantizer_tol,
                             static_cast<int>(cfg.quantizer_max_iter));
        const quantizer::Quantizer uniform =
            quantizer::uniform_quantizer(*lo_it, *hi_it, static_cast<int>(m));
        const std::pair<std::string, const quantizer::Quantizer*> variants[] = {
            {"lloyd", &trained.quantizer}, {"uniform", &uniform}};
        for (const auto& [rule, quant] : variants) {
            QuantizerRow row;
            row.rule = rule;
            row.levels = m;
            row.distortion = quant->distortion(samples);
            const PointOutcome po = run_point(cfg, norm, power, 0, root, quant);
            row.point = po.point;
            row.bound_ok = po.bound_ok;
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<MismatchRow> run_mismatch(const config::ExperimentConfig& cfg) {
    const LinkSetup link = make_link(cfg);
    // Taps in probe counts per released molecule; the precoder then works in
    // the same counts the solver reports.
    channel::TapVector count_taps = link.taps;
    for (double& t : count_taps.taps) t *= cfg.probe_width;
    count_taps.validate();

    const Rng root(cfg.seed);
    const long frames = cfg.fdm_frames;
    const long slots = cfg.frame_length;
    const auto n_ratios = cfg.mismatch_ratios.size();

    // Per-frame data and unit-target releases, fixed across ratios.
    std::vector<std::vector<std::uint8_t>> bits(static_cast<std::size_t>(frames));
    std::vector<std::vector<double>> released(static_cast<std::size_t>(frames));
    for (long f = 0; f < frames; ++f) {
        Rng brng = root.fork(kStreamFrameBits).fork(static_cast<std::uint64_t>(f));
        auto& fb = bits[static_cast<std::size_t>(f)];
        fb.resize(static_cast<std::size_t>(slots));
        for (auto& b : fb) b = static_cast<std::uint8_t>(brng.bit());
        precoder::PrecoderFilter filter(count_taps);
        released[static_cast<std::size_t>(f)] =
            filter.process(modulation::ts_encode(fb, 1.0).symbols);
    }

    const reaction_fdm::Probe probe{cfg.model.receiver_distance, cfg.probe_width};
    const reaction_fdm::GridSpec grid{cfg.grid_dx, cfg.grid_xmax, cfg.cfl};
    std::vector<double> sample_times(static_cast<std::size_t>(slots));
    for (long j = 0; j < slots; ++j)
        sample_times[static_cast<std::size_t>(j)] =
            static_cast<double>(j + 1) * link.ts;

    // Probe count difference and standard deviation per (ratio, frame, slot)
    // at unit target amplitude.
    std::vector<std::vector<std::vector<double>>> diff(n_ratios);
    std::vector<std::vector<std::vector<double>>> sdev(n_ratios);
    for (std::size_t ri = 0; ri < n_ratios; ++ri) {
        reaction_fdm::ReactionParams params;
        params.d_a = cfg.model.diffusion;
        params.d_b = cfg.mismatch_ratios[ri] * cfg.model.diffusion;
        params.zeta = cfg.zeta_si;
        params.substep_eta = cfg.substep_eta;
        diff[ri].resize(static_cast<std::size_t>(frames));
        sdev[ri].resize(static_cast<std::size_t>(frames));
        for (long f = 0; f < frames; ++f) {
            const auto& x = released[static_cast<std::size_t>(f)];
            const modulation::DualRelease dual = modulation::split_signed(x);
            std::vector<reaction_fdm::Release> rel;
            for (long j = 0; j < slots; ++j) {
                const auto ju = static_cast<std::size_t>(j);
                const double t = static_cast<double>(j) * link.ts;
                if (dual.species_a[ju] > 0.0)
                    rel.push_back({t, 0, 0.0, dual.species_a[ju]});
                if (dual.species_b[ju] > 0.0)
                    rel.push_back({t, 1, 0.0, dual.species_b[ju]});
            }
            const reaction_fdm::ProbeTraces tr =
                reaction_fdm::simulate(params, grid, rel, probe, sample_times);
            auto& d = diff[ri][static_cast<std::size_t>(f)];
            auto& s = sdev[ri][static_cast<std::size_t>(f)];
            d.resize(static_cast<std::size_t>(slots));
            s.resize(static_cast<std::size_t>(slots));
            for (long j = 0; j < slots; ++j) {
                const auto ju = static_cast<std::size_t>(j);
                d[ju] = tr.diff[ju] * cfg.probe_width;
                const double total = (tr.rho_a[ju] + tr.rho_b[ju]) * cfg.probe_width;
                s[ju] = std::sqrt(std::max(total, 0.0));
            }
        }
    }

    // Counting noise at amplitude scale theta: counts scale by theta and the
    // count variance equals the mean count, so the unit-amplitude decision
    // variable is diff + z * sdev / sqrt(theta). The noise stream depends
    // only on (frame, power, trial): ratios face identical noise.
    std::vector<MismatchRow> rows;
    for (std::size_t ri = 0; ri < n_ratios; ++ri) {
        for (std::size_t pi = 0; pi < cfg.powers.size(); ++pi) {
            const double inv_sqrt_theta = 1.0 / std::sqrt(cfg.powers[pi]);
            long errors = 0;
            for (long f = 0; f < frames; ++f) {
                const auto fu = static_cast<std::size_t>(f);
                const auto& d = diff[ri][fu];
                const auto& s = sdev[ri][fu];
                const auto& fb = bits[fu];
                const Rng frame_root = root.fork(kStreamFdmNoise)
                                           .fork(static_cast<std::uint64_t>(f))
                                           .fork(static_cast<std::uint64_t>(pi));
                for (long trial = 0; trial < cfg.trials; ++trial) {
                    Rng nrng = frame_root.fork(static_cast<std::uint64_t>(trial));
                    for (long j = 0; j < slots; ++j) {
                        const auto ju = static_cast<std::size_t>(j);
                        const double y = d[ju] + nrng.gaussian() * s[ju] * inv_sqrt_theta;
                        errors += receiver::ts_detect(y) != static_cast<int>(fb[ju]);
                    }
                }
            }
            const long decisions = frames * cfg.trials * slots;
            MismatchRow row;
            row.ratio = cfg.mismatch_ratios[ri];
            row.power = cfg.powers[pi];
            row.errors = errors;
            row.decisions = decisions;
            row.ber = static_cast<double>(errors) / static_cast<double>(decisions);
            row.ci95 = binomial_ci95(errors, decisions);
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<ReactionRow> run_reaction(const config::ExperimentConfig& cfg) {
    const LinkSetup link = make_link(cfg);
    channel::TapVector count_taps = link.taps;
    for (double& t : count_taps.taps) t *= cfg.probe_width;
    count_taps.validate();

    const Rng root(cfg.seed);
    const long frames = cfg.fdm_frames;
    const long slots = cfg.frame_slots;

    // The medium is linear when the solver's own reaction is off, so one run
    // per frame yields the probe counts every slow-reaction rate acts on.
    reaction_fdm::ReactionParams params;
    params.d_a = cfg.model.diffusion;
    params.d_b = cfg.model.diffusion;
    params.zeta = 0.0;
    params.substep_eta = cfg.substep_eta;
    const reaction_fdm::Probe probe{cfg.model.receiver_distance, cfg.probe_width};
    const reaction_fdm::GridSpec grid{cfg.grid_dx, cfg.grid_xmax, cfg.cfl};
    std::vector<double> sample_times(static_cast<std::size_t>(slots));
    for (long j = 0; j < slots; ++j)
        sample_times[static_cast<std::size_t>(j)] =
            static_cast<double>(j + 1) * link.ts;

    std::vector<double> min_acc(cfg.zeta_list.size(), 0.0);
    double absdiff_acc = 0.0;
    for (long f = 0; f < frames; ++f) {
        Rng brng = root.fork(kStreamFrameBits).fork(static_cast<std::uint64_t>(f));
        std::vector<std::uint8_t> fb(static_cast<std::size_t>(slots));
        for (auto& b : fb) b = static_cast<std::uint8_t>(brng.bit());
        precoder::PrecoderFilter filter(count_taps);
        const std::vector<double> released =
            filter.process(modulation::ts_encode(fb, cfg.beta_counts).symbols);
        const modulation::DualRelease dual = modulation::split_signed(released);
        std::vector<reaction_fdm::Release> rel;
        for (long j = 0; j < slots; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            const double t = static_cast<double>(j) * link.ts;
            if (dual.species_a[ju] > 0.0) rel.push_back({t, 0, 0.0, dual.species_a[ju]});
            if (dual.species_b[ju] > 0.0) rel.push_back({t, 1, 0.0, dual.species_b[ju]});
        }
        const reaction_fdm::ProbeTraces tr =
            reaction_fdm::simulate(params, grid, rel, probe, sample_times);
        for (long j = 0; j < slots; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            const double ca = tr.rho_a[ju] * cfg.probe_width;
            const double cb = tr.rho_b[ju] * cfg.probe_width;
            absdiff_acc += std::abs(ca - cb);
            for (std::size_t zi = 0; zi < cfg.zeta_list.size(); ++zi) {
                const auto [ra, rb] =
                    reaction_fdm::slow_reaction_ode(ca, cb, cfg.zeta_list[zi], cfg.t_r);
                min_acc[zi] += std::min(ra, rb);
            }
        }
    }
    const double count = static_cast<double>(frames) * static_cast<double>(slots);
    std::vector<ReactionRow> rows;
    for (std::size_t zi = 0; zi < cfg.zeta_list.size(); ++zi) {
        ReactionRow row;
        row.zeta = cfg.zeta_list[zi];
        row.zeta_tr = cfg.zeta_list[zi] * cfg.t_r;
        row.mean_min = min_acc[zi] / count;
        row.mean_abs_diff = absdiff_acc / count;
        row.frames = frames;
        rows.push_back(row);
    }
    return rows;
}

reaction_fdm::ProbeTraces run_reaction_trace(const config::ExperimentConfig& cfg) {
    reaction_fdm::ReactionParams params;
    params.d_a = cfg.model.diffusion;
    params.d_b = cfg.model.diffusion;
    // Per-count rate acting on probe counts = SI rate / probe width.
    params.zeta = cfg.trace_zeta * cfg.probe_width;
    params.substep_eta = cfg.substep_eta;
    const reaction_fdm::Probe probe{cfg.model.receiver_distance, cfg.probe_width};
    const reaction_fdm::GridSpec grid{cfg.grid_dx, cfg.grid_xmax, cfg.cfl};

    const double ts = cfg.ts_override;
    const reaction_fdm::Release releases[] = {
        {0.0, 0, 0.0, cfg.trace_amount},
        {ts, 1, 0.0, cfg.trace_amount},
    };
    std::vector<double> sample_times;
    const int n_samples = 150;
    sample_times.reserve(n_samples + 1);
    for (int k = 0; k <= n_samples; ++k)
        sample_times.push_back(static_cast<double>(k) * (2.5 * ts / n_samples));
    return reaction_fdm::simulate(params, grid, releases, probe, sample_times);
}

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw NumericsError("number formatting failed");
    return std::string(buf, ptr);
}

namespace {

void append_row(std::string& out, std::initializer_list<std::string> cells) {
    bool first = true;
    for (const auto& c : cells) {
        if (!first) out += ',';
        out += c;
        first = false;
    }
    out += '\n';
}

} // namespace

std::string to_csv(const std::vector<TapRow>& rows) {
    std::string out = "k,time,tap\n";
    for (const auto& r : rows)
        append_row(out, {std::to_string(r.k), format_number(r.time), format_number(r.tap)});
    return out;
}

std::string to_csv(const std::vector<BerPoint>& rows) {
    std::string out = "power,ber,ci95,errors,trials\n";
    for (const auto& r : rows)
        append_row(out, {format_number(r.power), format_number(r.ber),
                         format_number(r.ci95), std::to_string(r.errors),
                         std::to_string(r.trials)});
    return out;
}

std::string to_csv(const std::vector<QuantizerRow>& rows) {
    std::string out = "rule,levels,distortion,power,ber,ci95,errors,trials,bound_ok\n";
    for (const auto& r : rows)
        append_row(out, {r.rule, std::to_string(r.levels), format_number(r.distortion),
                         format_number(r.point.power), format_number(r.point.ber),
                         format_number(r.point.ci95), std::to_string(r.point.errors),
                         std::to_string(r.point.trials), r.bound_ok ? "1" : "0"});
    return out;
}

std::string to_csv(const std::vector<MismatchRow>& rows) {
    std::string out = "ratio,power,ber,ci95,errors,decisions\n";
    for (const auto& r : rows)
        append_row(out, {format_number(r.ratio), format_number(r.power),
                         format_number(r.ber), format_number(r.ci95),
                         std::to_string(r.errors), std::to_string(r.decisions)});
    return out;
}

std::string to_csv(const std::vector<ReactionRow>& rows) {
    std::string out = "zeta,zeta_tr,mean_min,mean_abs_diff,frames\n";
    for (const auto& r : rows)
        append_row(out, {format_number(r.zeta), format_number(r.zeta_tr),
                         format_number(r.mean_min), format_number(r.mean_abs_diff),
                         std::to_string(r.frames)});
    return out;
}

std::string to_csv(const reaction_fdm::ProbeTraces& traces) {
    std::string out = "t,rho_a,rho_b,diff\n";
    for (std::size_t i = 0; i < traces.time.size(); ++i)
        append_row(out, {format_number(traces.time[i]), format_number(traces.rho_a[i]),
                         format_number(traces.rho_b[i]), format_number(traces.diff[i])});
    return out;
}

} // namespace molink::harness

#include "molink/modulation.hpp"

#include <cmath>
#include <stdexcept>

#include "molink/errors.hpp"
#include "molink/precoder.hpp"

namespace molink::modulation {

namespace {

void check_amplitude(double amplitude) {
    if (!(amplitude > 0.0) || !std::isfinite(amplitude))
        throw std::invalid_argument("amplitude must be positive and finite");
}

} // namespace

SymbolFrame ts_encode(std::span<const std::uint8_t> bits, double amplitude) {
    check_amplitude(amplitude);
    SymbolFrame frame;
    frame.scheme = Scheme::ts;
    frame.amplitude = amplitude;
    frame.symbols.reserve(bits.size());
    for (const auto b : bits)
        frame.symbols.push_back(b ? amplitude : -amplitude);
    return frame;
}

SymbolFrame csk_encode(std::span<const std::uint8_t> bits, double amplitude) {
    check_amplitude(amplitude);
    SymbolFrame frame;
    frame.scheme = Scheme::csk;
    frame.amplitude = amplitude;
    frame.symbols.reserve(bits.size());
    for (const auto b : bits)
        frame.symbols.push_back(b ? amplitude : 0.0);
    return frame;
}

std::pair<SymbolFrame, SymbolFrame> mcsk_encode(std::span<const std::uint8_t> bits,
                                                double amplitude) {
    check_amplitude(amplitude);
    SymbolFrame a;
    SymbolFrame b;
    a.scheme = b.scheme = Scheme::mcsk;
    a.amplitude = b.amplitude = amplitude;
    a.symbols.assign(bits.size(), 0.0);
    b.symbols.assign(bits.size(), 0.0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        const double level = bits[i] ? amplitude : 0.0;
        if (i % 2 == 0)
            a.symbols[i] = level;
        else
            b.symbols[i] = level;
    }
    return {a, b};
}

DualRelease split_signed(std::span<const double> symbols) {
    DualRelease out;
    out.species_a.reserve(symbols.size());
    out.species_b.reserve(symbols.size());
    for (const double x : symbols) {
        out.species_a.push_back(x > 0.0 ? x : 0.0);
        out.species_b.push_back(x < 0.0 ? -x : 0.0);
    }
    return out;
}

double normalize_power(Scheme scheme, const channel::TapVector& taps,
                       double beta_target, double amplitude, long trials, Rng& rng) {
    check_amplitude(amplitude);
    if (!(beta_target > 0.0)) throw std::invalid_argument("beta_target must be positive");
    if (trials < 10000) throw std::invalid_argument("normalize_power needs >= 1e4 trials");

    if (scheme == Scheme::csk || scheme == Scheme::mcsk) {
        // Levels are 0 or amplitude with equiprobable bits, so the mean
        // released mass per slot is amplitude/2 for both schemes.
        return 2.0 * beta_target / amplitude;
    }

    taps.validate();
    const int warmup = taps.memory();
    precoder::PrecoderFilter filter(taps);
    for (int i = 0; i < warmup; ++i)
        filter.step(rng.bit() ? amplitude : -amplitude);

    double sum = 0.0;
    double sum_sq = 0.0;
    long n = 0;
    const long cap = 10 * trials;
    while (n < cap) {
        for (long i = 0; i < trials; ++i) {
            const double x = filter.step(rng.bit() ? amplitude : -amplitude);
            const double a = std::abs(x);
            sum += a;
            sum_sq += a * a;
        }
        n += trials;
        const double mean = sum / static_cast<double>(n);
        const double var = sum_sq / static_cast<double>(n) - mean * mean;
        const double sem = std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
        // 3 standard errors inside the 1% relative target.
        if (mean > 0.0 && sem / mean < 0.0033) return beta_target / mean;
    }
    throw EstimationError("normalize_power: released-mass estimate did not converge");
}

} // namespace molink::modulation

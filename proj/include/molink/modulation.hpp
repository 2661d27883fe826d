#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "molink/channel.hpp"
#include "molink/rng.hpp"

namespace molink::modulation {

enum class Scheme { ts, csk, mcsk };

// One frame of per-slot release levels. TS symbols are signed (positive mass
// on species A, negative on species B); CSK/MCSK symbols are non-negative.
struct SymbolFrame {
    Scheme scheme = Scheme::ts;
    double amplitude = 0.0;
    std::vector<double> symbols;
};

// Signed symbols split into the two physical release streams.
struct DualRelease {
    std::vector<double> species_a;
    std::vector<double> species_b;
};

SymbolFrame ts_encode(std::span<const std::uint8_t> bits, double amplitude);
SymbolFrame csk_encode(std::span<const std::uint8_t> bits, double amplitude);

// MCSK alternates the carrier species per slot: even slots release species A,
// odd slots species B. Returns the two per-species level streams (same length
// as bits, zero on the off slots).
std::pair<SymbolFrame, SymbolFrame> mcsk_encode(std::span<const std::uint8_t> bits,
                                                double amplitude);

DualRelease split_signed(std::span<const double> symbols);

// Scale s such that the scheme's mean released mass per slot at level
// s * amplitude equals beta_target. Closed-form for CSK/MCSK; Monte Carlo
// through the inverse-channel filter for TS (throws EstimationError if the
// estimate does not converge within 10x the requested trials).
double normalize_power(Scheme scheme, const channel::TapVector& taps,
                       double beta_target, double amplitude, long trials, Rng& rng);

} // namespace molink::modulation

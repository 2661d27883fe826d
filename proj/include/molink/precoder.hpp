#pragma once

#include <span>
#include <utility>
#include <vector>

#include "molink/channel.hpp"
#include "molink/rng.hpp"

namespace molink::precoder {

// Recursive inverse of the channel taps. Feeding it the target sequence B
// produces releases X with (p * X)_j = B_j exactly (up to rounding):
//   X_j = (B_j - sum_{k=1..L} p_k X_{j-k}) / p_0.
class PrecoderFilter {
  public:
    explicit PrecoderFilter(channel::TapVector taps);

    double step(double target);
    std::vector<double> process(std::span<const double> targets);
    void reset();

    const channel::TapVector& taps() const { return taps_; }

  private:
    channel::TapVector taps_;
    std::vector<double> state_; // X_{j-1} .. X_{j-L}, newest first
    std::size_t head_ = 0;
};

PrecoderFilter invert_channel(const channel::TapVector& taps);

// Eneström-Kakeya ratio interval for the reversed tap polynomial
// sum_i p_{L-i} z^i: every zero has modulus in [min, max] of the consecutive
// coefficient ratios. max < 1 certifies a stable (BIBO) inverse filter.
std::pair<double, double> enestrom_kakeya_bounds(const channel::TapVector& taps);

// Pole moduli of the inverse filter, sorted descending, computed with a dense
// eigensolver on the balanced companion matrix and refined by Newton steps.
// Each root is checked against the polynomial with a backward-residual
// tolerance of 1e-8 (NumericsError otherwise).
std::vector<double> verify_poles(const channel::TapVector& taps);

struct PowerEstimate {
    double mean_abs = 0.0;    // Monte Carlo over random sign sequences
    double mean_square = 0.0; // beta^2 * sum of squared inverse-impulse taps
};

// Steady-state released-power statistics of the inverse filter driven by
// independent +-beta targets. mean_square truncates the impulse response when
// the trailing energy falls below 1e-12 of the partial sum; a tail that stops
// decaying raises NumericsError.
PowerEstimate estimate_power(const channel::TapVector& taps, double beta,
                             long horizon, Rng& rng);

} // namespace molink::precoder

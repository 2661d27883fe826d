#pragma once

#include <span>

#include "molink/rng.hpp"

namespace molink::receiver {

enum class ReactionRegime { full_reaction, no_reaction, empirical };

// Particle-counting noise parameters: the measured concentration has variance
// g / vr where g is the total molecule concentration at the receiver.
struct NoiseModel {
    double vr = 0.0; // receiver volume
    ReactionRegime regime = ReactionRegime::full_reaction;

    void validate() const;
};

// Variance-shaping concentration for a sliding symbol window, window[k] being
// the symbol sent k slots before the current one. Complete annihilation
// leaves only the net signed concentration; with no reaction both species
// persist and their magnitudes add. Window and taps must have equal length.
double g_full_reaction(std::span<const double> taps, std::span<const double> window);
double g_no_reaction(std::span<const double> taps, std::span<const double> window);

// One noisy concentration measurement: mean plus zero-mean Gaussian noise of
// variance g_value / vr. Exact (no noise draw) when g_value is zero.
double observe(double mean, double g_value, const NoiseModel& noise, Rng& rng);

// Sign detector for differential (signed) signaling; ties decide 1.
int ts_detect(double y);

// Genie-aided MAP detector for on-off amplitude signaling with known
// interference mean isi: hypothesis 0 is N(isi, isi/vr), hypothesis 1 is
// N(isi + p0*a, (isi + p0*a)/vr). With isi = 0 the null hypothesis is a point
// mass and the rule degenerates to a small positive threshold.
int map_detect_genie(double y, double isi, double p0, double a, double vr);

} // namespace molink::receiver

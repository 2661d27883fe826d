#include "molink/receiver.hpp"

#include <cmath>
#include <stdexcept>

#include "molink/errors.hpp"

namespace molink::receiver {

void NoiseModel::validate() const {
    if (!(vr > 0.0) || !std::isfinite(vr))
        throw ModelError("receiver volume must be positive and finite");
}

namespace {

void check_window(std::span<const double> taps, std::span<const double> window) {
    if (taps.empty()) throw std::invalid_argument("empty tap vector");
    if (taps.size() != window.size())
        throw std::invalid_argument("window length must equal tap count");
    for (const double x : window)
        if (!std::isfinite(x)) throw std::invalid_argument("window value not finite");
}

} // namespace

double g_full_reaction(std::span<const double> taps, std::span<const double> window) {
    check_window(taps, window);
    double acc = 0.0;
    for (std::size_t k = 0; k < taps.size(); ++k) acc += taps[k] * window[k];
    return std::abs(acc);
}

double g_no_reaction(std::span<const double> taps, std::span<const double> window) {
    check_window(taps, window);
    double acc = 0.0;
    for (std::size_t k = 0; k < taps.size(); ++k) acc += taps[k] * std::abs(window[k]);
    return acc;
}

double observe(double mean, double g_value, const NoiseModel& noise, Rng& rng) {
    noise.validate();
    if (!std::isfinite(mean) || !std::isfinite(g_value))
        throw std::invalid_argument("observe: non-finite input");
    if (g_value < 0.0)
        throw ContractViolation("observe: negative variance-shaping concentration");
    if (g_value == 0.0) return mean;
    return mean + std::sqrt(g_value / noise.vr) * rng.gaussian();
}

int ts_detect(double y) {
    if (std::isnan(y)) throw std::invalid_argument("ts_detect: NaN observation");
    return y >= 0.0 ? 1 : 0;
}

int map_detect_genie(double y, double isi, double p0, double a, double vr) {
    if (!(p0 > 0.0) || !(a > 0.0) || !(vr > 0.0))
        throw std::invalid_argument("map_detect_genie: p0, a, vr must be positive");
    if (std::isnan(y) || !std::isfinite(isi))
        throw std::invalid_argument("map_detect_genie: non-finite input");
    if (isi < 0.0)
        throw ContractViolation("map_detect_genie: negative interference mean");

    const double mu0 = isi;
    const double mu1 = isi + p0 * a;
    const double v0 = mu0 / vr;
    const double v1 = mu1 / vr;
    if (v0 <= 0.0) {
        // Hypothesis 0 is a point mass at zero; anything meaningfully above
        // zero can only come from hypothesis 1.
        return y > 1e-12 * p0 * a ? 1 : 0;
    }
    const double l0 = -0.5 * std::log(v0) - (y - mu0) * (y - mu0) / (2.0 * v0);
    const double l1 = -0.5 * std::log(v1) - (y - mu1) * (y - mu1) / (2.0 * v1);
    return l1 >= l0 ? 1 : 0;
}

} // namespace molink::receiver

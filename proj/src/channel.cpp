#include "molink/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "molink/errors.hpp"

namespace molink::channel {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr int kGridPoints = 10000;
constexpr int kMemoryCap = 10000;

double impulse_kernel(int dimension, double diffusion, double t, double r) {
    if (t <= 0.0) return 0.0;
    const double denom = 4.0 * kPi * diffusion * t;
    const double arg = r * r / (4.0 * diffusion * t);
    const double scale = dimension == 1 ? 1.0 / std::sqrt(denom)
                                        : 1.0 / (denom * std::sqrt(denom));
    return scale * std::exp(-arg);
}

// Composite Simpson integration of the impulse kernel over [a, b].
double integrate_kernel(const ChannelModel& m, double a, double b) {
    if (b <= a) return 0.0;
    const int panels = 256;
    const double h = (b - a) / panels;
    double sum = impulse_kernel(m.dimension, m.diffusion, a, m.receiver_distance) +
                 impulse_kernel(m.dimension, m.diffusion, b, m.receiver_distance);
    for (int i = 1; i < panels; ++i) {
        const double t = a + h * i;
        const double w = (i % 2 == 1) ? 4.0 : 2.0;
        sum += w * impulse_kernel(m.dimension, m.diffusion, t, m.receiver_distance);
    }
    return sum * h / 3.0;
}

double golden_section_max(const ChannelModel& m, double lo, double hi) {
    const double inv_phi = 0.6180339887498948482;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = pulse_response(m, c);
    double fd = pulse_response(m, d);
    while ((b - a) > 1e-6 * 0.5 * (a + b)) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = pulse_response(m, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = pulse_response(m, d);
        }
    }
    return 0.5 * (a + b);
}

} // namespace

void ChannelModel::validate() const {
    if (dimension != 1 && dimension != 3)
        throw ModelError("channel dimension must be 1 or 3");
    if (!(diffusion > 0.0) || !std::isfinite(diffusion))
        throw ModelError("diffusion coefficient must be positive and finite");
    if (!(receiver_distance > 0.0) || !std::isfinite(receiver_distance))
        throw ModelError("receiver distance must be positive and finite");
    if (release_mode == ReleaseMode::rectangular &&
        (!(release_width > 0.0) || !std::isfinite(release_width)))
        throw ModelError("rectangular release requires a positive width");
}

void TapVector::validate() const {
    if (taps.empty()) throw ModelError("tap vector is empty");
    if (!(ts > 0.0)) throw ModelError("tap sampling interval must be positive");
    for (std::size_t i = 0; i < taps.size(); ++i) {
        if (!(taps[i] > 0.0) || !std::isfinite(taps[i]))
            throw ModelError("taps must be positive and finite");
        if (i > 0 && !(taps[i] < taps[i - 1]))
            throw ModelError("taps must be strictly decreasing");
    }
}

double green_function(const ChannelModel& model, double t, double r) {
    model.validate();
    if (!std::isfinite(t) || !std::isfinite(r) || r < 0.0)
        throw std::invalid_argument("green_function: t and r must be finite, r >= 0");
    return impulse_kernel(model.dimension, model.diffusion, t, r);
}

double pulse_response(const ChannelModel& model, double t) {
    model.validate();
    if (!std::isfinite(t))
        throw std::invalid_argument("pulse_response: t must be finite");
    if (t <= 0.0) return 0.0;
    if (model.release_mode == ReleaseMode::impulse)
        return impulse_kernel(model.dimension, model.diffusion, t, model.receiver_distance);
    const double lo = std::max(0.0, t - model.release_width);
    return integrate_kernel(model, lo, t) / model.release_width;
}

double sampling_interval(const ChannelModel& model) {
    model.validate();
    // Analytic impulse peak r^2/(2nD) anchors the scan range.
    const double r = model.receiver_distance;
    const double anchor = r * r / (2.0 * model.dimension * model.diffusion);
    const double lo = anchor / 100.0;
    double hi = anchor * 100.0;
    if (model.release_mode == ReleaseMode::rectangular) hi += 2.0 * model.release_width;

    const double log_lo = std::log(lo);
    const double step = (std::log(hi) - log_lo) / (kGridPoints - 1);
    std::vector<double> value(kGridPoints);
    int imax = 0;
    for (int i = 0; i < kGridPoints; ++i) {
        value[i] = pulse_response(model, std::exp(log_lo + step * i));
        if (value[i] > value[imax]) imax = i;
    }
    if (imax == 0 || imax == kGridPoints - 1)
        throw ModelError("response peak fell outside the scan range");
    // Unimodality: non-decreasing up to the max, non-increasing after, with a
    // small relative slack for floating-point wiggle.
    for (int i = 0; i < imax; ++i)
        if (value[i] > value[i + 1] * (1.0 + 1e-9))
            throw ModelError("pulse response is not unimodal on the scan grid");
    for (int i = imax; i + 1 < kGridPoints; ++i)
        if (value[i + 1] > value[i] * (1.0 + 1e-9))
            throw ModelError("pulse response is not unimodal on the scan grid");

    const double bracket_lo = std::exp(log_lo + step * (imax - 1));
    const double bracket_hi = std::exp(log_lo + step * (imax + 1));
    return golden_section_max(model, bracket_lo, bracket_hi);
}

TapVector taps_at(const ChannelModel& model, int memory, double ts) {
    model.validate();
    if (memory < 1) throw std::invalid_argument("tap memory must be >= 1");
    if (!(ts > 0.0)) throw std::invalid_argument("tap interval must be positive");
    TapVector tv;
    tv.ts = ts;
    tv.taps.resize(static_cast<std::size_t>(memory) + 1);
    for (int j = 0; j <= memory; ++j)
        tv.taps[static_cast<std::size_t>(j)] = pulse_response(model, (j + 1) * ts);
    tv.validate();
    return tv;
}

TapVector channel_taps(const ChannelModel& model, int memory) {
    return taps_at(model, memory, sampling_interval(model));
}

int memory_length(const ChannelModel& model, double epsilon, double ts) {
    model.validate();
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw std::invalid_argument("epsilon must lie in (0, 1)");
    const double p0 = pulse_response(model, ts);
    if (!(p0 > 0.0)) throw ModelError("first tap is not positive");
    for (int L = 1; L <= kMemoryCap; ++L) {
        if (pulse_response(model, (L + 1) * ts) < epsilon * p0) return L;
    }
    throw NumericsError("memory length exceeds cap: tail decays too slowly");
}

int memory_length(const ChannelModel& model, double epsilon) {
    return memory_length(model, epsilon, sampling_interval(model));
}

} // namespace molink::channel

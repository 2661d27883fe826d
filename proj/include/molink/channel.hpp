#pragma once

#include <vector>

namespace molink::channel {

enum class ReleaseMode { impulse, rectangular };

// Pure-diffusion propagation model between a point source and a point probe
// in an unbounded 1-D or 3-D medium with no drift.
struct ChannelModel {
    int dimension = 1;          // 1 or 3
    double diffusion = 0.0;     // m^2/s
    double receiver_distance = 0.0; // m
    ReleaseMode release_mode = ReleaseMode::impulse;
    double release_width = 0.0; // s, only for rectangular releases

    void validate() const;
};

// Channel taps p_0..p_L sampled at multiples of the interval ts:
// taps[j] is the probe response (j+1)*ts after an impulse release.
struct TapVector {
    std::vector<double> taps;
    double ts = 0.0;

    int memory() const { return static_cast<int>(taps.size()) - 1; }
    void validate() const;
};

// Free-space concentration kernel: zero for t <= 0, otherwise
// (4*pi*D*t)^(-n/2) * exp(-r^2 / (4*D*t)) for n = model.dimension.
double green_function(const ChannelModel& model, double t, double r);

// Probe response at time t to a unit release at t = 0. Impulse releases
// evaluate the kernel directly; rectangular releases of width w average it
// over the emission interval.
double pulse_response(const ChannelModel& model, double t);

// Location of the response peak, found by a log-spaced grid scan (which also
// checks unimodality) followed by golden-section refinement to a relative
// tolerance of 1e-6.
double sampling_interval(const ChannelModel& model);

// Taps at an explicit sampling interval. Throws ModelError if the sampled
// sequence is not strictly decreasing and positive.
TapVector taps_at(const ChannelModel& model, int memory, double ts);

// Taps at the peak-aligned interval from sampling_interval().
TapVector channel_taps(const ChannelModel& model, int memory);

// Smallest L >= 1 with pulse_response((L+1)*ts) < epsilon * p_0. Throws
// NumericsError if L would exceed 10^4.
int memory_length(const ChannelModel& model, double epsilon);
int memory_length(const ChannelModel& model, double epsilon, double ts);

} // namespace molink::channel

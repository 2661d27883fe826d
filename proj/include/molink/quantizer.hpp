#pragma once

#include <span>
#include <vector>

namespace molink::quantizer {

// Scalar quantizer: boundaries partition the real line into cells, each cell
// mapped to one reconstruction level. boundaries.size() == levels.size() - 1,
// boundaries strictly increasing, levels non-decreasing.
struct Quantizer {
    std::vector<double> boundaries;
    std::vector<double> levels;

    void validate() const;
    double quantize(double x) const;
    // Mean squared error over a sample set.
    double distortion(std::span<const double> samples) const;
};

// Midrise uniform quantizer on [lo, hi] with m cells; values outside the
// range saturate to the outermost levels.
Quantizer uniform_quantizer(double lo, double hi, int m);

struct LloydResult {
    Quantizer quantizer;
    std::vector<double> distortion_history; // one entry per iteration
    int iterations = 0;
    int reseeds = 0; // empty cells reinitialized during the iteration
};

// Lloyd-Max design on an empirical sample set, initialized from the uniform
// quantizer spanning the sample range. Stops when the relative distortion
// decrease falls below tol or after max_iter iterations.
LloydResult lloyd(std::span<const double> samples, int m, double tol, int max_iter);

} // namespace molink::quantizer

#include "molink/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "molink/errors.hpp"

namespace molink::quantizer {

void Quantizer::validate() const {
    if (levels.empty()) throw ModelError("quantizer has no levels");
    if (boundaries.size() + 1 != levels.size())
        throw ModelError("quantizer needs exactly one boundary between consecutive levels");
    for (std::size_t i = 0; i + 1 < boundaries.size(); ++i)
        if (!(boundaries[i] < boundaries[i + 1]))
            throw ModelError("quantizer boundaries must be strictly increasing");
    for (const double v : levels)
        if (!std::isfinite(v)) throw ModelError("quantizer level not finite");
    for (const double b : boundaries)
        if (!std::isfinite(b)) throw ModelError("quantizer boundary not finite");
    for (std::size_t i = 0; i + 1 < levels.size(); ++i)
        if (!(levels[i] < levels[i + 1]))
            throw ModelError("quantizer levels must be strictly increasing");
}

double Quantizer::quantize(double x) const {
    if (!std::isfinite(x)) throw std::invalid_argument("quantize: input not finite");
    // Cell index = number of boundaries <= x, so a value sitting exactly on a
    // boundary lands in the upper cell.
    const auto it = std::upper_bound(boundaries.begin(), boundaries.end(), x);
    const std::size_t idx = static_cast<std::size_t>(it - boundaries.begin());
    return levels[idx];
}

double Quantizer::distortion(std::span<const double> samples) const {
    if (samples.empty()) throw std::invalid_argument("distortion: empty sample set");
    double acc = 0.0;
    for (const double x : samples) {
        const double e = x - quantize(x);
        acc += e * e;
    }
    return acc / static_cast<double>(samples.size());
}

Quantizer uniform_quantizer(double lo, double hi, int m) {
    if (m < 1) throw std::invalid_argument("uniform_quantizer: need at least one cell");
    if (!(lo < hi)) throw std::invalid_argument("uniform_quantizer: lo must be below hi");
    Quantizer q;
    const double step = (hi - lo) / static_cast<double>(m);
    q.levels.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
        q.levels.push_back(lo + (static_cast<double>(i) + 0.5) * step);
    q.boundaries.reserve(static_cast<std::size_t>(m) - 1);
    for (int i = 1; i < m; ++i)
        q.boundaries.push_back(lo + static_cast<double>(i) * step);
    q.validate();
    return q;
}

namespace {

// Index of the first sample >= b in sorted samples.
std::size_t lower_index(const std::vector<double>& sorted, double b) {
    return static_cast<std::size_t>(
        std::lower_bound(sorted.begin(), sorted.end(), b) - sorted.begin());
}

} // namespace

LloydResult lloyd(std::span<const double> samples, int m, double tol, int max_iter) {
    if (m < 1) throw std::invalid_argument("lloyd: need at least one level");
    if (samples.size() < 10 * static_cast<std::size_t>(m))
        throw std::invalid_argument("lloyd: need at least 10 samples per level");
    if (!(tol > 0.0)) throw std::invalid_argument("lloyd: tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("lloyd: max_iter must be positive");

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    if (!std::isfinite(sorted.front()) || !std::isfinite(sorted.back()))
        throw std::invalid_argument("lloyd: samples must be finite");

    // Prefix sums of x and x^2 let each centroid and the distortion be
    // evaluated per cell in O(1).
    std::vector<double> ps(n + 1, 0.0);
    std::vector<double> ps2(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        ps[i + 1] = ps[i] + sorted[i];
        ps2[i + 1] = ps2[i] + sorted[i] * sorted[i];
    }

    const double lo = sorted.front();
    const double hi = sorted.back();
    if (lo == hi) throw std::invalid_argument("lloyd: all samples identical");
    if (m > 1 && hi - lo < static_cast<double>(m) * 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)))
        throw std::invalid_argument("lloyd: sample range too narrow for the level count");
    Quantizer q = uniform_quantizer(lo, hi, m);

    auto edges_of = [&](const Quantizer& qq) {
        std::vector<std::size_t> edge(static_cast<std::size_t>(m) + 1);
        edge[0] = 0;
        for (int i = 0; i + 1 < m; ++i)
            edge[static_cast<std::size_t>(i) + 1] =
                lower_index(sorted, qq.boundaries[static_cast<std::size_t>(i)]);
        edge[static_cast<std::size_t>(m)] = n;
        return edge;
    };
    auto mse_of = [&](const Quantizer& qq, const std::vector<std::size_t>& edge) {
        double dist = 0.0;
        for (int c = 0; c < m; ++c) {
            const std::size_t a = edge[static_cast<std::size_t>(c)];
            const std::size_t b = edge[static_cast<std::size_t>(c) + 1];
            if (b == a) continue;
            const double lvl = qq.levels[static_cast<std::size_t>(c)];
            dist += (ps2[b] - ps2[a]) - 2.0 * lvl * (ps[b] - ps[a]) +
                    lvl * lvl * static_cast<double>(b - a);
        }
        return dist / static_cast<double>(n);
    };

    LloydResult result;
    std::vector<std::size_t> edge = edges_of(q);
    // history[0] is the distortion of the uniform initializer, so the final
    // entry being no worse than the first certifies the refinement paid off.
    double prev = mse_of(q, edge);
    result.distortion_history.push_back(prev);
    result.iterations = 0;
    for (int iter = 0; iter < max_iter; ++iter) {
        // Centroid update; an empty cell is reseeded inside the most
        // populated cell so every level stays in use.
        for (int c = 0; c < m; ++c) {
            const std::size_t a = edge[static_cast<std::size_t>(c)];
            const std::size_t b = edge[static_cast<std::size_t>(c) + 1];
            if (b > a) {
                q.levels[static_cast<std::size_t>(c)] =
                    (ps[b] - ps[a]) / static_cast<double>(b - a);
            } else {
                std::size_t best = 0;
                std::size_t best_count = 0;
                for (int j = 0; j < m; ++j) {
                    const std::size_t cnt = edge[static_cast<std::size_t>(j) + 1] - edge[static_cast<std::size_t>(j)];
                    if (cnt > best_count) {
                        best_count = cnt;
                        best = static_cast<std::size_t>(j);
                    }
                }
                const std::size_t midpos = edge[best] + best_count / 2;
                q.levels[static_cast<std::size_t>(c)] = sorted[midpos];
                ++result.reseeds;
            }
        }
        std::sort(q.levels.begin(), q.levels.end());
        // Reseeding can duplicate a level; keep them strictly increasing.
        for (std::size_t i = 0; i + 1 < q.levels.size(); ++i)
            if (!(q.levels[i] < q.levels[i + 1]))
                q.levels[i + 1] = std::nextafter(q.levels[i],
                                                 std::numeric_limits<double>::infinity());

        // Boundary update: midpoints between consecutive levels. Coincident
        // levels would give non-increasing boundaries; nudge apart.
        for (int c = 0; c + 1 < m; ++c)
            q.boundaries[static_cast<std::size_t>(c)] =
                0.5 * (q.levels[static_cast<std::size_t>(c)] + q.levels[static_cast<std::size_t>(c) + 1]);
        for (std::size_t i = 0; i + 1 < q.boundaries.size(); ++i)
            if (!(q.boundaries[i] < q.boundaries[i + 1]))
                q.boundaries[i + 1] = std::nextafter(q.boundaries[i],
                                                     std::numeric_limits<double>::infinity());

        edge = edges_of(q);
        const double dist = mse_of(q, edge);
        result.distortion_history.push_back(dist);
        result.iterations = iter + 1;
        if (dist > prev * (1.0 + 1e-12))
            throw NumericsError("lloyd: distortion increased between iterations");
        if (prev == 0.0 || (prev - dist) / prev < tol) break;
        prev = dist;
    }

    q.validate();
    result.quantizer = q;
    return result;
}

} // namespace molink::quantizer

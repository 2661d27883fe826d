#include "molink/precoder.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "molink/errors.hpp"

namespace molink::precoder {

PrecoderFilter::PrecoderFilter(channel::TapVector taps) : taps_(std::move(taps)) {
    taps_.validate();
    state_.assign(taps_.taps.size(), 0.0);
    head_ = 0;
}

double PrecoderFilter::step(double target) {
    if (!std::isfinite(target)) throw std::invalid_argument("target must be finite");
    const auto& p = taps_.taps;
    const std::size_t len = p.size();
    // state_[(head_ + k) % len] holds X_{j-1-k}; taps beyond p[0] weight them.
    double isi = 0.0;
    for (std::size_t k = 0; k + 1 < len; ++k)
        isi += p[k + 1] * state_[(head_ + k) % len];
    const double x = (target - isi) / p[0];
    head_ = (head_ + len - 1) % len;
    state_[head_] = x;
    return x;
}

std::vector<double> PrecoderFilter::process(std::span<const double> targets) {
    std::vector<double> out;
    out.reserve(targets.size());
    for (const double b : targets) out.push_back(step(b));
    return out;
}

void PrecoderFilter::reset() {
    std::fill(state_.begin(), state_.end(), 0.0);
    head_ = 0;
}

PrecoderFilter invert_channel(const channel::TapVector& taps) {
    return PrecoderFilter(taps);
}

namespace {

// Parlett-Reinsch balancing with radix-2 factors: an exact diagonal
// similarity that narrows the row/column norm spread. Long tap sequences
// give companion matrices whose entries span many orders of magnitude, and
// without this the QR iteration loses the small roots.
void balance_in_place(Eigen::MatrixXd& a) {
    const Eigen::Index n = a.rows();
    bool again = true;
    while (again) {
        again = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            double c = 0.0, r = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            const double s = c + r;
            double f = 1.0;
            while (c < r / 2.0) {
                f *= 2.0;
                c *= 4.0;
            }
            while (c > r * 2.0) {
                f /= 2.0;
                c /= 4.0;
            }
            if ((c + r) / f < 0.95 * s) {
                again = true;
                a.row(i) /= f;
                a.col(i) *= f;
            }
        }
    }
}

} // namespace

std::pair<double, double> enestrom_kakeya_bounds(const channel::TapVector& taps) {
    taps.validate();
    const auto& p = taps.taps;
    if (p.size() < 2) return {0.0, 0.0};
    // Poles are roots of sum_i c_i z^i with c_i = p_{L-i}; all coefficients
    // positive, so every ratio c_i / c_{i+1} = p_{k+1} / p_k brackets the
    // pole moduli.
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
        const double ratio = p[k + 1] / p[k];
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    return {lo, hi};
}

std::vector<double> verify_poles(const channel::TapVector& taps) {
    taps.validate();
    const auto& p = taps.taps;
    if (p.size() < 2) return {};
    const std::size_t deg = p.size() - 1;

    // Monic polynomial z^deg + (p_1/p_0) z^{deg-1} + ... + p_L/p_0.
    std::vector<double> monic(deg);
    for (std::size_t i = 0; i < deg; ++i) monic[i] = p[i + 1] / p[0];

    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(deg),
                                                      static_cast<Eigen::Index>(deg));
    for (std::size_t i = 0; i + 1 < deg; ++i)
        companion(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(i)) = 1.0;
    for (std::size_t i = 0; i < deg; ++i)
        companion(0, static_cast<Eigen::Index>(i)) = -monic[i];

    balance_in_place(companion);

    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw NumericsError("verify_poles: eigensolver failed to converge");

    // Polynomial value, derivative and the coefficient-magnitude scale
    // accumulated along the same Horner recursion; value/scale is the
    // relative backward residual of a candidate root.
    const auto horner = [&](std::complex<double> z, std::complex<double>& q,
                            std::complex<double>& dq, double& scale) {
        q = {1.0, 0.0};
        dq = {0.0, 0.0};
        scale = 1.0;
        for (std::size_t k = 0; k < deg; ++k) {
            dq = dq * z + q;
            q = q * z + monic[k];
            scale = scale * std::abs(z) + std::abs(monic[k]);
        }
        if (scale <= 0.0) scale = 1.0;
    };

    std::vector<double> moduli;
    moduli.reserve(deg);
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        std::complex<double> z = solver.eigenvalues()(i);
        std::complex<double> q, dq;
        double scale = 1.0;
        horner(z, q, dq, scale);
        double res = std::abs(q) / scale;
        // Newton polish from the eigenvalue seed; each accepted step must
        // shrink the residual, so clustered roots just stop early.
        for (int it = 0; it < 60 && res > 1e-14; ++it) {
            if (!(std::abs(dq) > 0.0)) break;
            const std::complex<double> zn = z - q / dq;
            std::complex<double> qn, dqn;
            double sn = 1.0;
            horner(zn, qn, dqn, sn);
            const double rn = std::abs(qn) / sn;
            if (!(rn < res)) break;
            z = zn;
            q = qn;
            dq = dqn;
            res = rn;
        }
        if (res > 1e-8)
            throw NumericsError("verify_poles: root residual too large");
        moduli.push_back(std::abs(z));
    }
    std::sort(moduli.begin(), moduli.end(), std::greater<double>());
    return moduli;
}

PowerEstimate estimate_power(const channel::TapVector& taps, double beta, long horizon, Rng& rng) {
    taps.validate();
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (horizon < 1000)
        throw std::invalid_argument("horizon must be at least 1000 draws");

    // Impulse response of the inverse filter: h_0 = 1/p_0, then the
    // recursion with zero input. Tail must decay for the estimate to exist.
    const auto& p = taps.taps;
    const std::size_t len = p.size();
    std::vector<double> h;
    h.reserve(256);
    h.push_back(1.0 / p[0]);
    double sum_sq = h[0] * h[0];
    const long cap = std::max<long>(horizon, 1000000);
    for (long n = 1; n <= cap; ++n) {
        double acc = 0.0;
        for (std::size_t k = 1; k < len && static_cast<long>(k) <= n; ++k)
            acc += p[k] * h[static_cast<std::size_t>(n - static_cast<long>(k))];
        const double hn = -acc / p[0];
        h.push_back(hn);
        sum_sq += hn * hn;
        if (hn * hn < 1e-24 * sum_sq && n >= static_cast<long>(len)) break;
        if (n == cap)
            throw NumericsError("estimate_power: inverse impulse response does not decay");
    }

    // Mean |X| by Monte Carlo over random sign sequences pushed through the
    // filter; mean square has the closed form beta^2 * sum h_n^2.
    PrecoderFilter filter(taps);
    for (std::size_t i = 0; i < len; ++i)
        filter.step(rng.bit() ? beta : -beta);
    double abs_sum = 0.0;
    for (long i = 0; i < horizon; ++i)
        abs_sum += std::abs(filter.step(rng.bit() ? beta : -beta));

    PowerEstimate est;
    est.mean_abs = abs_sum / static_cast<double>(horizon);
    est.mean_square = beta * beta * sum_sq;
    return est;
}

} // namespace molink::precoder

#include "molink/reaction_fdm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "molink/errors.hpp"

namespace molink::reaction_fdm {

void ReactionParams::validate() const {
    if (!(d_a > 0.0) || !std::isfinite(d_a) || !(d_b > 0.0) || !std::isfinite(d_b))
        throw ConfigError("diffusion coefficients must be positive and finite");
    if (zeta < 0.0 || !std::isfinite(zeta))
        throw ConfigError("reaction rate must be non-negative and finite");
    if (!(substep_eta > 0.0) || substep_eta > 1.0)
        throw ConfigError("substep_eta must lie in (0, 1]");
}

ReactionField::ReactionField(const ReactionParams& params, const GridSpec& grid,
                             double t_end)
    : params_(params) {
    params_.validate();
    if (!(grid.dx > 0.0) || !std::isfinite(grid.dx))
        throw ConfigError("grid dx must be positive and finite");
    if (grid.x_max < 0.0 || !std::isfinite(grid.x_max))
        throw ConfigError("grid x_max must be non-negative and finite");
    if (!(grid.cfl > 0.0) || grid.cfl > 0.5)
        throw ConfigError("explicit diffusion stencil requires 0 < cfl <= 0.5");
    if (!(t_end > 0.0) || !std::isfinite(t_end))
        throw ConfigError("simulation horizon must be positive and finite");

    dx_ = grid.dx;
    const double d_max = std::max(params_.d_a, params_.d_b);
    // Emulates the unbounded medium: absorbed mass at +-x_max stays
    // negligible when the domain spans at least ten diffusion lengths.
    const double x_need =
        std::max({grid.x_max, 10.0 * std::sqrt(2.0 * d_max * t_end), 20.0 * dx_});
    const double half_cells = std::ceil(x_need / dx_ - 1e-9);
    if (!(half_cells > 0.0) || half_cells > 2.5e7)
        throw ConfigError("grid would need " + std::to_string(half_cells) +
                          " cells per side; refuse to allocate");
    const std::size_t m = static_cast<std::size_t>(half_cells);
    x_max_ = static_cast<double>(m) * dx_;
    const std::size_t n = 2 * m + 1; // cell centers at integer multiples of dx
    a_.assign(n, 0.0);
    b_.assign(n, 0.0);
    a_next_.assign(n, 0.0);
    b_next_.assign(n, 0.0);
    dt_max_ = grid.cfl * dx_ * dx_ / d_max;
}

double ReactionField::x_at(std::size_t i) const {
    return -x_max_ + static_cast<double>(i) * dx_;
}

const std::vector<double>& ReactionField::rho(int species) const {
    if (species == 0) return a_;
    if (species == 1) return b_;
    throw std::invalid_argument("species must be 0 or 1");
}

void ReactionField::deposit(int species, double position, double amount) {
    if (species != 0 && species != 1) throw std::invalid_argument("species must be 0 or 1");
    if (!(amount >= 0.0) || !std::isfinite(amount))
        throw std::invalid_argument("release amount must be non-negative and finite");
    if (!std::isfinite(position) || std::abs(position) > x_max_)
        throw std::invalid_argument("release position outside the grid");
    if (amount == 0.0) return;
    const auto i = static_cast<std::size_t>(std::llround((position + x_max_) / dx_));
    auto& field = species == 0 ? a_ : b_;
    field[std::min(i, field.size() - 1)] += amount / dx_;
    injected_[species] += amount;
}

void ReactionField::step(double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
    if (dt > dt_max_ * (1.0 + 1e-9))
        throw ConfigError("time step violates the diffusion stability bound");
    diffuse(dt);
    if (params_.zeta > 0.0) react(dt);
    clamp_negatives(a_);
    clamp_negatives(b_);
    t_ += dt;
}

void ReactionField::diffuse(double dt) {
    const double ca = params_.d_a * dt / (dx_ * dx_);
    const double cb = params_.d_b * dt / (dx_ * dx_);
    const std::size_t n = a_.size();
    // Zero-concentration ghost cells beyond +-x_max; the flux into them is
    // the recorded boundary leakage.
    a_next_[0] = a_[0] + ca * (a_[1] - 2.0 * a_[0]);
    for (std::size_t i = 1; i + 1 < n; ++i)
        a_next_[i] = a_[i] + ca * (a_[i - 1] - 2.0 * a_[i] + a_[i + 1]);
    a_next_[n - 1] = a_[n - 1] + ca * (a_[n - 2] - 2.0 * a_[n - 1]);
    b_next_[0] = b_[0] + cb * (b_[1] - 2.0 * b_[0]);
    for (std::size_t i = 1; i + 1 < n; ++i)
        b_next_[i] = b_[i] + cb * (b_[i - 1] - 2.0 * b_[i] + b_[i + 1]);
    b_next_[n - 1] = b_[n - 1] + cb * (b_[n - 2] - 2.0 * b_[n - 1]);
    leaked_[0] += ca * (a_[0] + a_[n - 1]) * dx_;
    leaked_[1] += cb * (b_[0] + b_[n - 1]) * dx_;
    a_.swap(a_next_);
    b_.swap(b_next_);
}

void ReactionField::react(double dt) {
    const std::size_t n = a_.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (a_[i] <= 0.0 || b_[i] <= 0.0) continue;
        const auto [ra, rb] =
            reaction_substep(a_[i], b_[i], params_.zeta, dt, params_.substep_eta);
        a_[i] = ra;
        b_[i] = rb;
    }
}

void ReactionField::clamp_negatives(std::vector<double>& field) {
    double mn = 0.0;
    for (const double v : field) mn = std::min(mn, v);
    if (mn >= 0.0) return;
    double mx = 0.0;
    for (const double v : field) mx = std::max(mx, v);
    const double band = -1e-12 * mx;
    for (double& v : field) {
        if (v < 0.0) {
            if (v < band)
                throw NumericsError("negative concentration beyond the rounding band");
            v = 0.0;
        }
    }
}

double ReactionField::injected(int species) const {
    if (species != 0 && species != 1) throw std::invalid_argument("species must be 0 or 1");
    return injected_[species];
}

double ReactionField::leaked(int species) const {
    if (species != 0 && species != 1) throw std::invalid_argument("species must be 0 or 1");
    return leaked_[species];
}

void ReactionField::check_leakage(double tol) const {
    for (int s = 0; s < 2; ++s) {
        if (injected_[s] > 0.0 && leaked_[s] > tol * injected_[s])
            throw NumericsError("boundary leakage exceeds " + std::to_string(tol) +
                                " of the injected mass; enlarge the domain");
    }
}

double ReactionField::probe_average(int species, const Probe& probe) const {
    const auto& field = rho(species);
    if (!(probe.width > 0.0) || !std::isfinite(probe.width) || !std::isfinite(probe.center))
        throw ModelError("probe must have a finite positive width");
    if (std::abs(probe.center) + probe.width / 2.0 > x_max_ + dx_)
        throw ModelError("probe window lies outside the grid");
    // Cells whose centers fall in the window, with a sub-cell tolerance so an
    // edge landing exactly on a center resolves deterministically inward.
    const double tol = 1e-6 * dx_;
    const double lo = probe.center - probe.width / 2.0 - tol;
    const double hi = probe.center + probe.width / 2.0 + tol;
    const auto i_lo_f = std::ceil((lo + x_max_) / dx_);
    const auto i_hi_f = std::floor((hi + x_max_) / dx_);
    const long i_lo = std::max(0L, static_cast<long>(i_lo_f));
    const long i_hi =
        std::min(static_cast<long>(field.size()) - 1, static_cast<long>(i_hi_f));
    if (i_hi < i_lo) throw ModelError("probe window contains no grid cell");
    double acc = 0.0;
    for (long i = i_lo; i <= i_hi; ++i) acc += field[static_cast<std::size_t>(i)];
    return acc / static_cast<double>(i_hi - i_lo + 1);
}

std::pair<double, double> ReactionField::probe_pair(const Probe& probe) const {
    return {probe_average(0, probe), probe_average(1, probe)};
}

ProbeTraces simulate(const ReactionParams& params, const GridSpec& grid,
                     std::span<const Release> releases, const Probe& probe,
                     std::span<const double> sample_times) {
    if (sample_times.empty()) throw std::invalid_argument("simulate: no sample times");
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        if (!(sample_times[i] >= 0.0) || !std::isfinite(sample_times[i]))
            throw std::invalid_argument("simulate: sample times must be non-negative");
        if (i > 0 && !(sample_times[i] > sample_times[i - 1]))
            throw std::invalid_argument("simulate: sample times must be strictly increasing");
    }
    std::vector<Release> rel(releases.begin(), releases.end());
    double t_end = sample_times.back();
    for (const auto& r : rel) {
        if (!(r.time >= 0.0) || !std::isfinite(r.time))
            throw std::invalid_argument("simulate: release times must be non-negative");
        t_end = std::max(t_end, r.time);
    }
    std::stable_sort(rel.begin(), rel.end(),
                     [](const Release& x, const Release& y) { return x.time < y.time; });

    ReactionField field(params, grid, t_end);
    ProbeTraces out;
    out.time.reserve(sample_times.size());

    std::size_t ri = 0;
    std::size_t si = 0;
    double t_cur = 0.0;
    while (si < sample_times.size() || ri < rel.size()) {
        double t_next = std::numeric_limits<double>::infinity();
        if (si < sample_times.size()) t_next = sample_times[si];
        if (ri < rel.size()) t_next = std::min(t_next, rel[ri].time);
        if (t_next > t_cur) {
            // Equal CFL-safe sub-steps landing exactly on the event instant.
            const double span = t_next - t_cur;
            const auto steps = std::max(
                1L, static_cast<long>(std::ceil(span / field.max_stable_dt() - 1e-9)));
            const double dt = span / static_cast<double>(steps);
            for (long k = 0; k < steps; ++k) field.step(dt);
            t_cur = t_next;
        }
        while (si < sample_times.size() && sample_times[si] <= t_cur) {
            const auto [pa, pb] = field.probe_pair(probe);
            out.time.push_back(sample_times[si]);
            out.rho_a.push_back(pa);
            out.rho_b.push_back(pb);
            out.diff.push_back(pa - pb);
            ++si;
        }
        while (ri < rel.size() && rel[ri].time <= t_cur) {
            field.deposit(rel[ri].species, rel[ri].position, rel[ri].amount);
            ++ri;
        }
    }
    field.check_leakage();
    return out;
}

std::pair<double, double> slow_reaction_ode(double rho_a0, double rho_b0, double rate,
                                            double t) {
    if (t < 0.0 || !std::isfinite(t)) throw std::invalid_argument("time must be non-negative");
    if (!(rate >= 0.0) || !std::isfinite(rate))
        throw std::invalid_argument("rate must be non-negative and finite");
    if (!(rho_a0 >= 0.0) || !(rho_b0 >= 0.0) || !std::isfinite(rho_a0) ||
        !std::isfinite(rho_b0))
        throw std::invalid_argument("concentrations must be non-negative and finite");
    if (rate == 0.0 || t == 0.0 || rho_a0 == 0.0 || rho_b0 == 0.0)
        return {rho_a0, rho_b0};

    const double delta = rho_a0 - rho_b0;
    if (delta == 0.0) {
        const double denom = 1.0 + rate * rho_b0 * t;
        return {rho_a0 / denom, rho_b0 / denom};
    }
    if (delta > 0.0) {
        const double decay = std::exp(-rate * delta * t);
        const double rb =
            delta * rho_b0 * decay / (delta - rho_b0 * std::expm1(-rate * delta * t));
        return {rb + delta, rb};
    }
    const double d = -delta;
    const double decay = std::exp(-rate * d * t);
    const double ra = d * rho_a0 * decay / (d - rho_a0 * std::expm1(-rate * d * t));
    return {ra, ra + d};
}

std::pair<double, double> reaction_substep(double rho_a, double rho_b, double rate,
                                           double dt, double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
    if (!(rate >= 0.0) || !(dt >= 0.0))
        throw std::invalid_argument("rate and dt must be non-negative");
    if (!(rho_a >= 0.0) || !(rho_b >= 0.0) || !std::isfinite(rho_a) || !std::isfinite(rho_b))
        throw std::invalid_argument("concentrations must be non-negative and finite");
    if (rate == 0.0 || dt == 0.0 || rho_a == 0.0 || rho_b == 0.0) return {rho_a, rho_b};

    // Enough substeps that rate * rho * h never exceeds eta; concentrations
    // only decrease, so the initial bound stays valid throughout.
    const double load = rate * std::max(rho_a, rho_b) * dt / eta;
    if (!(load < 1e9)) throw NumericsError("reaction substep count exploded");
    const auto n = std::max(1L, static_cast<long>(std::ceil(load)));
    const double h = dt / static_cast<double>(n);
    double a = rho_a;
    double b = rho_b;
    for (long k = 0; k < n; ++k) {
        const double d = rate * h * a * b;
        a -= d;
        b -= d;
    }
    return {a, b};
}

double empirical_g(const ReactionParams& params, const GridSpec& grid,
                   std::span<const double> window, double ts, const Probe& probe) {
    if (window.empty()) throw std::invalid_argument("empirical_g: empty symbol window");
    if (!(ts > 0.0) || !std::isfinite(ts))
        throw std::invalid_argument("empirical_g: ts must be positive");
    for (const double x : window)
        if (!std::isfinite(x)) throw std::invalid_argument("empirical_g: non-finite symbol");
    if (probe.width < 4.0 * grid.dx * (1.0 - 1e-9))
        throw ConfigError("empirical_g: grid must resolve the probe with at least 4 cells");

    // window[k] is the symbol k slots before current: released at (W-1-k)*ts,
    // positive mass as species A and negative as species B, probed at W*ts so
    // the newest symbol has aged exactly one slot.
    const std::size_t w = window.size();
    std::vector<Release> releases;
    releases.reserve(w);
    for (std::size_t k = 0; k < w; ++k) {
        const double x = window[k];
        if (x == 0.0) continue;
        Release r;
        r.time = static_cast<double>(w - 1 - k) * ts;
        r.species = x > 0.0 ? 0 : 1;
        r.position = 0.0;
        r.amount = std::abs(x);
        releases.push_back(r);
    }
    const double sample = static_cast<double>(w) * ts;
    const ProbeTraces tr = simulate(params, grid, releases, probe, std::span(&sample, 1));
    return tr.rho_a.front() + tr.rho_b.front();
}

} // namespace molink::reaction_fdm

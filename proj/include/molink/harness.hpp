#pragma once

#include <string>
#include <vector>

#include "molink/config.hpp"
#include "molink/reaction_fdm.hpp"

namespace molink::harness {

struct TapRow {
    int k = 0;
    double time = 0.0; // seconds after release
    double tap = 0.0;  // concentration per unit release
};

struct BerPoint {
    double power = 0.0;
    double ber = 0.0;
    double ci95 = 0.0;
    long errors = 0;
    long trials = 0;
    long decisions = 0; // trials * frame_length
};

struct QuantizerRow {
    std::string rule; // none, lloyd or uniform
    long levels = 0;
    double distortion = 0.0; // mean squared error on the training set
    BerPoint point;
    bool bound_ok = true; // ISI perturbation stayed within the quantizer bound
};

struct MismatchRow {
    double ratio = 0.0; // receiver-assumed d_b over true d_a
    double power = 0.0;
    double ber = 0.0;
    double ci95 = 0.0;
    long errors = 0;
    long decisions = 0;
};

struct ReactionRow {
    double zeta = 0.0;    // per-count reaction rate
    double zeta_tr = 0.0; // dimensionless exposure zeta * t_r
    double mean_min = 0.0;
    double mean_abs_diff = 0.0;
    long frames = 0;
};

// Half-width of the normal-approximation 95% interval for a binomial rate.
double binomial_ci95(long errors, long decisions);

std::vector<TapRow> run_taps(const config::ExperimentConfig& cfg);
std::vector<BerPoint> run_ber(const config::ExperimentConfig& cfg);
std::vector<QuantizerRow> run_quantizer(const config::ExperimentConfig& cfg);
std::vector<MismatchRow> run_mismatch(const config::ExperimentConfig& cfg);
std::vector<ReactionRow> run_reaction(const config::ExperimentConfig& cfg);
reaction_fdm::ProbeTraces run_reaction_trace(const config::ExperimentConfig& cfg);

// Shortest round-trip decimal form; identical inputs give identical bytes.
std::string format_number(double v);

std::string to_csv(const std::vector<TapRow>& rows);
std::string to_csv(const std::vector<BerPoint>& rows);
std::string to_csv(const std::vector<QuantizerRow>& rows);
std::string to_csv(const std::vector<MismatchRow>& rows);
std::string to_csv(const std::vector<ReactionRow>& rows);
std::string to_csv(const reaction_fdm::ProbeTraces& traces);

} // namespace molink::harness

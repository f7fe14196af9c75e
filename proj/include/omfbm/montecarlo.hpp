#pragma once

#include "omfbm/cameron_martin.hpp"
#include "omfbm/grid.hpp"
#include "omfbm/kernel_diagnostics.hpp"
#include "omfbm/onsager_machlup.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace omfbm {

// Fewer acceptances than this and a conditional estimate is flagged.
constexpr long kMinAccepted = 100;

struct McEstimate {
    double mean = 0.0;
    double std_err = 0.0;
    long n_total = 0;
    long n_accepted = 0;
    std::uint64_t seed = 0;
    double epsilon = 0.0;
    NormKind norm;
    bool flagged = false;
};

// Fraction of N Cholesky paths with norm < eps, binomial standard error. N >= 1000.
McEstimate smallball_prob(const NormKind& norm, double eps, const HurstConfig& cfg, const Grid& grid, long N,
                          std::uint64_t seed, int d = 1);

struct ScalingReport {
    double exponent = 0.0;  // 1/H or 1/(H - alpha)
    std::vector<double> epsilons;
    std::vector<long> hits;
    std::vector<double> probs;
    std::vector<double> log_probs;
    std::vector<double> log_stderr;
    std::vector<double> rescaled;  // eps^exponent * log P
    std::vector<bool> usable;      // false when hits < kMinAccepted
    double stability_ratio = 0.0;  // max|rescaled| / min|rescaled| over usable entries
    bool all_negative = false;
    long N = 0;
    std::uint64_t seed = 0;
};

// One set of N samples, evaluated at every eps (so P-hat is monotone in eps).
ScalingReport smallball_scaling(const NormKind& norm, std::vector<double> eps_schedule, const HurstConfig& cfg,
                                const Grid& grid, long N, std::uint64_t seed, int d = 1);

/*
 * Functionals of the first coordinate B of a Volterra sample:
 *   exp_linear            e^(c B_s)
 *   exp_skorokhod_G       e^(delta u), u' = G(h_t) B_t
 *   exp_skorokhod_power   e^(delta u), u' = g(h_t) B_t^m
 *   exp_skorokhod_det     e^(delta psi) for a fixed psi in the Cameron-Martin space
 * The divergence is the left-point sum of K^{-1}u against the sampler's own dW.
 */
struct Functional {
    enum class Kind { ExpLinear, ExpSkorokhodG, ExpSkorokhodPower, ExpSkorokhodDeterministic };
    Kind kind = Kind::ExpLinear;
    double c = 0.0, s = 1.0;
    ScalarFn g{"constant", {1.0}};
    std::optional<CmElement> h;
    int m = 1;
};
Functional exp_linear(double c, double s);
Functional exp_skorokhod_G(const ScalarFn& G, const CmElement& h);
Functional exp_skorokhod_power(const ScalarFn& g, const CmElement& h, int m);
Functional exp_skorokhod_deterministic(const CmElement& psi);
std::string to_string(Functional::Kind k);

// E(F | |B| < eps) by rejection, stderr from 20 batch means of the accepted samples.
McEstimate conditional_exp(const Functional& F, double eps, const NormKind& norm, const HurstConfig& cfg,
                           const Grid& grid, long N, std::uint64_t seed, int d = 1);
// Same samples for every eps.
std::vector<McEstimate> conditional_exp_schedule(const Functional& F, const std::vector<double>& eps_schedule,
                                                 const NormKind& norm, const HurstConfig& cfg, const Grid& grid,
                                                 long N, std::uint64_t seed, int d = 1);

/*
 * Trend of a sequence of estimates ordered by decreasing eps toward a target: every step
 * either moves closer or stays within 2 joint standard errors, and the last estimate
 * is closer than the first.
 */
struct TrendCheck {
    bool monotone = false;
    double first_distance = 0.0;
    double last_distance = 0.0;
};
TrendCheck trend_toward(const std::vector<double>& values, const std::vector<double>& stderrs, double target);

struct RatioRow {
    double epsilon = 0.0;
    long n_x = 0;    // |X - h| < eps
    long n_b = 0;    // |B| < eps
    long n_both = 0;
    double ratio = 0.0;
    double log_ratio = 0.0;
    double log_stderr = 0.0;  // delta method on the coupled counts
    bool flagged = false;
};

struct OmRatioReport {
    std::vector<RatioRow> rows;  // in schedule order
    OmReport om;                 // J(h) for comparison
    long N = 0;
    std::uint64_t seed = 0;
    NormKind norm;
};

// Both events on the same N Cholesky noise draws; X is the Euler solution driven by each draw.
OmRatioReport om_ratio_experiment(const DriftField& drift, const CmElement& h, const std::vector<double>& eps_schedule,
                                  const NormKind& norm, const HurstConfig& cfg, const Grid& grid, long N,
                                  std::uint64_t seed);

struct ProbeReport {
    int m = 1;
    int m_max = 1;  // floor(1/(2H - 2 alpha))
    double alpha = 0.0;
    std::vector<McEstimate> estimates;
    double limsup_bound = 0.0;  // max over the two smallest eps of estimate - 3 stderr
    bool consistent = false;    // limsup_bound <= 1
};

// Conditioning norm: Hoelder alpha, or sup for alpha = 0. Reports, never asserts, the limsup condition.
ProbeReport h_alpha_probe(const CmElement& h, const ScalarFn& g, int m, double alpha,
                          const std::vector<double>& eps_schedule, const HurstConfig& cfg, const Grid& grid, long N,
                          std::uint64_t seed);

}  // namespace omfbm

#include "omfbm/montecarlo.hpp"

#include "omfbm/fbm.hpp"
#include "omfbm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace omfbm {

namespace {

constexpr int kBatch = 128;
constexpr int kStderrBatches = 20;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Norm of one sample given as d pointers to n+1 node values.
class NormEval {
public:
    NormEval(const NormKind& k, const Grid& g) : k_(k), g_(g) {
        if (k.kind == NormKind::Kind::Holder) {
            w_.assign(g.size(), 0.0);
            for (int j = 1; j <= g.n(); ++j) w_[j] = std::pow(j * g.dt(), -k.alpha);
        }
    }
    double operator()(const std::vector<const double*>& comp) const {
        const int m = g_.size();
        if (comp.size() == 1) {
            const double* x = comp[0];
            switch (k_.kind) {
            case NormKind::Kind::Sup: return sup_norm_1d(x, m);
            case NormKind::Kind::Holder: return sup_norm_1d(x, m) + holder_seminorm_1d(x, m, w_.data());
            case NormKind::Kind::FracSobolev: break;
            }
        }
        Eigen::MatrixXd P(comp.size(), m);
        for (size_t c = 0; c < comp.size(); ++c)
            for (int j = 0; j < m; ++j) P(c, j) = comp[c][j];
        return path_norm(Path(g_, std::move(P)), k_);
    }

private:
    NormKind k_;
    Grid g_;
    std::vector<double> w_;
};

// visit(first, count) over consecutive batches of sample indices, in parallel.
template <class Visit>
void for_each_batch(long N, Visit&& visit) {
    const long nb = (N + kBatch - 1) / kBatch;
    parallel_chunks(nb, 1, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t k = b; k < e; ++k) {
            const long first = k * kBatch;
            visit(first, static_cast<int>(std::min<long>(kBatch, N - first)));
        }
    });
}

void check_eps(const std::vector<double>& eps) {
    if (eps.empty()) throw std::invalid_argument("epsilon schedule is empty");
    for (double e : eps)
        if (!(e > 0.0) || !std::isfinite(e)) throw std::invalid_argument("epsilon values must be finite and > 0");
}

void check_dim(int d) {
    if (d < 1) throw std::invalid_argument("dimension d must be >= 1");
}

// Norms of N Cholesky samples, indexed by sample.
std::vector<double> cholesky_norms(const NormKind& norm, const HurstConfig& cfg, const Grid& grid, long N,
                                   std::uint64_t seed, int d) {
    CholeskySampler S(grid, cfg);
    NormEval ne(norm, grid);
    std::vector<double> out(N);
    for_each_batch(N, [&](long first, int count) {
        std::vector<Eigen::MatrixXd> B(d);
        for (int c = 0; c < d; ++c) S.fill(seed, first, count, c, B[c]);
        std::vector<const double*> cols(d);
        for (int j = 0; j < count; ++j) {
            for (int c = 0; c < d; ++c) cols[c] = B[c].col(j).data();
            out[first + j] = ne(cols);
        }
    });
    return out;
}

McEstimate conditional_summary(const std::vector<double>& norms, const std::vector<double>& vals, double eps) {
    std::vector<double> acc;
    for (size_t i = 0; i < norms.size(); ++i)
        if (norms[i] < eps) acc.push_back(vals[i]);
    McEstimate e;
    e.n_total = static_cast<long>(norms.size());
    e.n_accepted = static_cast<long>(acc.size());
    e.epsilon = eps;
    e.flagged = e.n_accepted < kMinAccepted;
    const long a = e.n_accepted;
    if (a == 0) {
        e.mean = kNaN;
        e.std_err = kNaN;
        return e;
    }
    double s = 0.0;
    for (double v : acc) s += v;
    e.mean = s / a;
    if (a >= kStderrBatches) {
        double bm[kStderrBatches];
        for (int k = 0; k < kStderrBatches; ++k) {
            const long lo = a * k / kStderrBatches, hi = a * (k + 1) / kStderrBatches;
            double t = 0.0;
            for (long i = lo; i < hi; ++i) t += acc[i];
            bm[k] = t / (hi - lo);
        }
        double mb = 0.0, v = 0.0;
        for (double x : bm) mb += x;
        mb /= kStderrBatches;
        for (double x : bm) v += (x - mb) * (x - mb);
        e.std_err = std::sqrt(v / (kStderrBatches - 1) / kStderrBatches);
    } else if (a >= 2) {
        double v = 0.0;
        for (double x : acc) v += (x - e.mean) * (x - e.mean);
        e.std_err = std::sqrt(v / (a - 1) / a);
    } else {
        e.std_err = kNaN;
    }
    return e;
}

}  // namespace

McEstimate smallball_prob(const NormKind& norm, double eps, const HurstConfig& cfg, const Grid& grid, long N,
                          std::uint64_t seed, int d) {
    if (!(eps >= 0.0)) throw std::invalid_argument("smallball_prob: epsilon must be >= 0");
    if (N < 1000) throw std::invalid_argument("smallball_prob: N must be >= 1000");
    check_dim(d);
    const auto norms = cholesky_norms(norm, cfg, grid, N, seed, d);
    long hits = 0;
    for (double v : norms) hits += v < eps;
    McEstimate e;
    e.n_total = N;
    e.n_accepted = hits;
    e.seed = seed;
    e.epsilon = eps;
    e.norm = norm;
    e.mean = double(hits) / N;
    e.std_err = std::sqrt(e.mean * (1.0 - e.mean) / N);
    return e;
}

ScalingReport smallball_scaling(const NormKind& norm, std::vector<double> eps, const HurstConfig& cfg,
                                const Grid& grid, long N, std::uint64_t seed, int d) {
    check_eps(eps);
    if (N < 1000) throw std::invalid_argument("smallball_scaling: N must be >= 1000");
    check_dim(d);
    for (size_t i = 1; i < eps.size(); ++i)
        if (!(eps[i] < eps[i - 1])) throw std::invalid_argument("smallball_scaling: epsilon schedule must decrease");
    const auto norms = cholesky_norms(norm, cfg, grid, N, seed, d);
    ScalingReport r;
    r.exponent = norm.smallball_exponent(cfg.H);
    r.epsilons = eps;
    r.N = N;
    r.seed = seed;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    bool neg = true;
    int used = 0;
    for (double e : eps) {
        long hits = 0;
        for (double v : norms) hits += v < e;
        const double p = double(hits) / N;
        r.hits.push_back(hits);
        r.probs.push_back(p);
        r.log_probs.push_back(hits > 0 ? std::log(p) : -std::numeric_limits<double>::infinity());
        r.log_stderr.push_back(hits > 0 ? std::sqrt((1.0 - p) / (N * p)) : kNaN);
        const double resc = hits > 0 ? std::pow(e, r.exponent) * std::log(p) : kNaN;
        r.rescaled.push_back(resc);
        const bool ok = hits >= kMinAccepted;
        r.usable.push_back(ok);
        if (ok) {
            ++used;
            neg = neg && resc < 0.0;
            lo = std::min(lo, std::abs(resc));
            hi = std::max(hi, std::abs(resc));
        }
    }
    r.all_negative = used > 0 && neg;
    r.stability_ratio = used > 0 && lo > 0.0 ? hi / lo : kNaN;
    return r;
}

Functional exp_linear(double c, double s) {
    if (!std::isfinite(c)) throw std::invalid_argument("exp_linear: c must be finite");
    if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("exp_linear: s must be in [0,1]");
    Functional f;
    f.kind = Functional::Kind::ExpLinear;
    f.c = c;
    f.s = s;
    return f;
}

Functional exp_skorokhod_G(const ScalarFn& G, const CmElement& h) {
    Functional f = exp_skorokhod_power(G, h, 1);
    f.kind = Functional::Kind::ExpSkorokhodG;
    return f;
}

Functional exp_skorokhod_power(const ScalarFn& g, const CmElement& h, int m) {
    if (m < 1) throw std::invalid_argument("exp_skorokhod_power: m must be >= 1");
    if (!h.h.is_pinned()) throw std::invalid_argument("skorokhod functional: h must be pinned");
    Functional f;
    f.kind = Functional::Kind::ExpSkorokhodPower;
    f.g = g;
    f.h = h;
    f.m = m;
    return f;
}

Functional exp_skorokhod_deterministic(const CmElement& psi) {
    if (!psi.h.is_pinned()) throw std::invalid_argument("exp_skorokhod_deterministic: psi must be pinned");
    Functional f;
    f.kind = Functional::Kind::ExpSkorokhodDeterministic;
    f.h = psi;
    return f;
}

std::string to_string(Functional::Kind k) {
    switch (k) {
    case Functional::Kind::ExpLinear: return "exp_linear";
    case Functional::Kind::ExpSkorokhodG: return "exp_skorokhod_G";
    case Functional::Kind::ExpSkorokhodPower: return "exp_skorokhod_power";
    case Functional::Kind::ExpSkorokhodDeterministic: return "exp_skorokhod_deterministic";
    }
    return "?";
}

std::vector<McEstimate> conditional_exp_schedule(const Functional& F, const std::vector<double>& eps,
                                                 const NormKind& norm, const HurstConfig& cfg, const Grid& grid,
                                                 long N, std::uint64_t seed, int d) {
    check_eps(eps);
    check_dim(d);
    if (N < 1) throw std::invalid_argument("conditional_exp: N must be >= 1");
    const int n = grid.n();
    const double eps_max = *std::max_element(eps.begin(), eps.end());

    // beta = A v for the Skorokhod functionals, rows 0..n-1 (left points)
    Eigen::MatrixXd A;
    Eigen::VectorXd gh, beta_det;
    if (F.kind != Functional::Kind::ExpLinear) {
        if (!F.h || F.h->h.grid() != grid) throw std::invalid_argument("conditional_exp: h must live on the run grid");
    }
    if (F.kind == Functional::Kind::ExpSkorokhodG || F.kind == Functional::Kind::ExpSkorokhodPower) {
        const double C = 1.0 / (cfg.c_H * std::tgamma(cfg.H + 0.5));
        A = C * integral_matrix(grid, 0.5 - cfg.H, 0.5 - cfg.H, cfg.H - 0.5, Basis::Nodal).topRows(n);
        gh.resize(n + 1);
        for (int j = 0; j <= n; ++j) gh[j] = F.g(F.h->h.samples()(0, j));
    } else if (F.kind == Functional::Kind::ExpSkorokhodDeterministic) {
        const auto M = k_inverse_matrix(grid, cfg, CmMethod::Derivative);
        beta_det = (*M * F.h->h.samples().row(0).transpose()).head(n);
    }

    VolterraSampler S(grid, cfg);
    NormEval ne(norm, grid);
    std::vector<double> norms(N), vals(N, 0.0);
    for_each_batch(N, [&](long first, int count) {
        std::vector<Eigen::MatrixXd> B(d), dW(d);
        for (int c = 0; c < d; ++c) S.fill(seed, first, count, c, B[c], dW[c]);
        std::vector<const double*> cols(d);
        Eigen::VectorXd v(n + 1);
        for (int j = 0; j < count; ++j) {
            for (int c = 0; c < d; ++c) cols[c] = B[c].col(j).data();
            const double nv = ne(cols);
            norms[first + j] = nv;
            if (!(nv < eps_max)) continue;
            const auto b = B[0].col(j);
            double x = 0.0;
            switch (F.kind) {
            case Functional::Kind::ExpLinear: {
                const double pos = F.s * n;
                const int k = std::min(static_cast<int>(pos), n - 1);
                const double w = pos - k;
                x = F.c * ((1.0 - w) * b[k] + w * b[k + 1]);
                break;
            }
            case Functional::Kind::ExpSkorokhodG:
            case Functional::Kind::ExpSkorokhodPower:
                for (int i = 0; i <= n; ++i) v[i] = gh[i] * std::pow(b[i], F.m);
                x = (A * v).dot(dW[0].col(j));
                break;
            case Functional::Kind::ExpSkorokhodDeterministic: x = beta_det.dot(dW[0].col(j)); break;
            }
            vals[first + j] = std::exp(x);
        }
    });

    std::vector<McEstimate> out;
    for (double e : eps) {
        McEstimate est = conditional_summary(norms, vals, e);
        est.seed = seed;
        est.norm = norm;
        out.push_back(est);
    }
    return out;
}

McEstimate conditional_exp(const Functional& F, double eps, const NormKind& norm, const HurstConfig& cfg,
                           const Grid& grid, long N, std::uint64_t seed, int d) {
    return conditional_exp_schedule(F, {eps}, norm, cfg, grid, N, seed, d)[0];
}

TrendCheck trend_toward(const std::vector<double>& values, const std::vector<double>& stderrs, double target) {
    if (values.size() != stderrs.size() || values.size() < 2)
        throw std::invalid_argument("trend_toward: need at least two values with stderrs");
    TrendCheck t;
    t.first_distance = std::abs(values.front() - target);
    t.last_distance = std::abs(values.back() - target);
    bool ok = t.last_distance < t.first_distance;
    for (size_t i = 1; i < values.size(); ++i) {
        const double before = std::abs(values[i - 1] - target), after = std::abs(values[i] - target);
        const double joint = std::sqrt(stderrs[i - 1] * stderrs[i - 1] + stderrs[i] * stderrs[i]);
        if (!(after <= before || std::abs(values[i] - values[i - 1]) <= 2.0 * joint)) ok = false;
    }
    t.monotone = ok;
    return t;
}

OmRatioReport om_ratio_experiment(const DriftField& drift, const CmElement& h, const std::vector<double>& eps,
                                  const NormKind& norm, const HurstConfig& cfg, const Grid& grid, long N,
                                  std::uint64_t seed) {
    check_eps(eps);
    if (N < 1000) throw std::invalid_argument("om_ratio_experiment: N must be >= 1000");
    const int d = drift.dim;
    const Path& hp = h.h;
    if (hp.grid() != grid) throw std::invalid_argument("om_ratio_experiment: h must live on the run grid");
    if (hp.dim() != d) throw std::invalid_argument("om_ratio_experiment: h and drift dimensions differ");
    if (!hp.is_pinned()) throw std::invalid_argument("om_ratio_experiment: h must be pinned");
    const int n = grid.n();
    const double dt = grid.dt();

    OmRatioReport rep;
    rep.om = om_functional(drift, h, cfg);
    rep.N = N;
    rep.seed = seed;
    rep.norm = norm;

    CholeskySampler S(grid, cfg);
    NormEval ne(norm, grid);
    std::vector<double> nx(N), nb(N);
    for_each_batch(N, [&](long first, int count) {
        std::vector<Eigen::MatrixXd> B(d);
        for (int c = 0; c < d; ++c) S.fill(seed, first, count, c, B[c]);
        Eigen::MatrixXd X(d, n + 1);
        std::vector<const double*> cb(d), cx(d);
        std::vector<Eigen::VectorXd> xc(d, Eigen::VectorXd(n + 1));
        for (int j = 0; j < count; ++j) {
            for (int c = 0; c < d; ++c) cb[c] = B[c].col(j).data();
            nb[first + j] = ne(cb);
            if (drift.coordinatewise()) {
                for (int c = 0; c < d; ++c) euler_solve_1d(drift, c, cb[c], xc[c].data(), n, dt);
            } else {
                Eigen::MatrixXd Bp(d, n + 1);
                for (int c = 0; c < d; ++c) Bp.row(c) = B[c].col(j).transpose();
                const Path Xp = euler_solve(drift, Path(grid, std::move(Bp)), grid);
                for (int c = 0; c < d; ++c) xc[c] = Xp.samples().row(c).transpose();
            }
            for (int c = 0; c < d; ++c) {
                xc[c] -= hp.samples().row(c).transpose();
                cx[c] = xc[c].data();
            }
            nx[first + j] = ne(cx);
        }
    });

    for (double e : eps) {
        RatioRow r;
        r.epsilon = e;
        for (long i = 0; i < N; ++i) {
            const bool a = nx[i] < e, b = nb[i] < e;
            r.n_x += a;
            r.n_b += b;
            r.n_both += a && b;
        }
        r.flagged = r.n_x < kMinAccepted || r.n_b < kMinAccepted;
        if (r.n_x > 0 && r.n_b > 0) {
            const double a = r.n_x, b = r.n_b;
            r.ratio = a / b;
            r.log_ratio = std::log(r.ratio);
            // delta method on the coupled counts; in this form identical events give exactly 0
            r.log_stderr = std::sqrt((a + b - 2.0 * r.n_both) / (a * b));
        } else {
            r.ratio = r.n_b > 0 ? 0.0 : kNaN;
            r.log_ratio = kNaN;
            r.log_stderr = kNaN;
        }
        rep.rows.push_back(r);
    }
    return rep;
}

ProbeReport h_alpha_probe(const CmElement& h, const ScalarFn& g, int m, double alpha,
                          const std::vector<double>& eps, const HurstConfig& cfg, const Grid& grid, long N,
                          std::uint64_t seed) {
    if (!(alpha >= 0.0 && alpha < cfg.H)) throw std::invalid_argument("h_alpha_probe: need 0 <= alpha < H");
    ProbeReport r;
    r.alpha = alpha;
    r.m = m;
    r.m_max = static_cast<int>(std::floor(1.0 / (2.0 * cfg.H - 2.0 * alpha) + 1e-12));
    if (m < 1 || m > r.m_max)
        throw std::invalid_argument("h_alpha_probe: m must be in [1, " + std::to_string(r.m_max) + "]");
    const NormKind norm = alpha == 0.0 ? NormKind::sup() : NormKind::holder(alpha);
    r.estimates = conditional_exp_schedule(exp_skorokhod_power(g, h, m), eps, norm, cfg, grid, N, seed);
    // the two smallest eps
    std::vector<size_t> idx(eps.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return eps[a] < eps[b]; });
    double bound = -std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < std::min<size_t>(2, idx.size()); ++k) {
        const McEstimate& e = r.estimates[idx[k]];
        const double se = std::isfinite(e.std_err) ? e.std_err : 0.0;
        if (std::isfinite(e.mean)) bound = std::max(bound, e.mean - 3.0 * se);
    }
    r.limsup_bound = std::isfinite(bound) ? bound : kNaN;
    r.consistent = std::isfinite(bound) && bound <= 1.0;
    return r;
}

}  // namespace omfbm

#include "omfbm/cameron_martin.hpp"

#include "omfbm/parallel.hpp"
#include "omfbm/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace omfbm {

double covariance(double s, double t, double H) {
    const double h2 = 2.0 * H;
    return 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(s - t), h2));
}

CovarianceMatrix covariance_matrix(const Grid& g, double H) {
    if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("covariance_matrix: H must be in (0,1)");
    const int m = g.size();
    Eigen::MatrixXd R(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j <= i; ++j) R(i, j) = R(j, i) = covariance(g.node(i), g.node(j), H);
    return {g, std::move(R)};
}

namespace {

/*
 * After Pfaff, K(t,u) = c_H t^(1/2-H) u^(H-1/2) (t-u)^(H-1/2) phi(u/t) with
 * phi(r) = F(H-1/2, 2H; H+1/2; 1-r). phi is summed as a power series in z = 1-r for
 * z <= 1/2; for r < 1/2 the connection formula around z = 1 gives
 *   phi(r) = G1 (1-r)^(1/2-H) + G2 r^(1-2H) S(r),  S(r) = F(1, 1/2-H; 2-2H; r),
 * which also isolates the non-smooth r^(1-2H) piece for the first-cell quadrature.
 */
struct KernelEval {
    double H, cH, G1, G2;

    explicit KernelEval(const HurstConfig& cfg) : H(cfg.H), cH(cfg.c_H) {
        G1 = std::tgamma(H + 0.5) * std::tgamma(1.0 - 2.0 * H) / std::tgamma(0.5 - H);
        G2 = std::tgamma(H + 0.5) * std::tgamma(2.0 * H - 1.0) / (std::tgamma(H - 0.5) * std::tgamma(2.0 * H));
    }

    double series_z(double z) const {
        const double a = H - 0.5, b = 2.0 * H, c = H + 0.5;
        double term = 1.0, sum = 1.0;
        for (int k = 0; k < 400; ++k) {
            term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
            sum += term;
            if (std::abs(term) < 1e-17 * std::abs(sum)) break;
        }
        return sum;
    }
    double S(double r) const {
        const double a = 0.5 - H, c = 2.0 - 2.0 * H;
        double term = 1.0, sum = 1.0;
        for (int k = 0; k < 400; ++k) {
            term *= (a + k) / (c + k) * r;
            sum += term;
            if (term < 1e-17 * sum) break;
        }
        return sum;
    }
    double A(double r) const { return G1 * std::pow(1.0 - r, 0.5 - H); }
    double B(double r) const { return G2 * S(r); }
    double phi(double r) const {
        const double z = 1.0 - r;
        if (z <= 0.5) return series_z(z);
        return A(r) + B(r) * std::pow(r, 1.0 - 2.0 * H);
    }
    double K(double t, double u) const {
        return cH * std::pow(t, 0.5 - H) * std::pow(u, H - 0.5) * std::pow(t - u, H - 0.5) * phi(u / t);
    }
};

const KernelEval& kernel_eval(const HurstConfig& cfg) {
    thread_local std::map<double, KernelEval> cache;
    auto it = cache.find(cfg.H);
    if (it == cache.end()) it = cache.emplace(cfg.H, KernelEval(cfg)).first;
    return it->second;
}

constexpr int kQ = 12;

struct RowMoments {
    double s0, s1;  // int K (1-x), int K x over the cell
};

/*
 * Unit-scale cell integrals for row i (t = i, u = k + x). Three situations:
 *  - a stretch [0,L] touching u = 0: weight x^(H-1/2), phi split so that the
 *    r^(1-2H) part gets its own Jacobi weight;
 *  - a stretch [1-L,1] touching u = t: weight (1-x)^(H-1/2);
 *  - anything else: Gauss-Legendre.
 */
class RowIntegrator {
public:
    RowIntegrator(const KernelEval& ke, int i) : ke_(ke), i_(i), H_(ke.H) {
        ci_ = ke.cH * std::pow(double(i), 0.5 - H_);
    }

    // int_0^L over cell 0, r = x/i must stay <= 1/2
    RowMoments near_zero(double L) const {
        const QuadRule& ra = gauss_jacobi01(H_ - 0.5, 0.0, kQ);
        const QuadRule& rb = gauss_jacobi01(0.5 - H_, 0.0, kQ);
        RowMoments m{0.0, 0.0};
        const double fa = std::pow(L, H_ + 0.5), fb = std::pow(L, 1.5 - H_) * std::pow(double(i_), 2.0 * H_ - 1.0);
        for (int q = 0; q < kQ; ++q) {
            double x = L * ra.x[q];
            double v = fa * ra.w[q] * std::pow(i_ - x, H_ - 0.5) * ke_.A(x / i_);
            m.s0 += v * (1.0 - x);
            m.s1 += v * x;
            x = L * rb.x[q];
            v = fb * rb.w[q] * std::pow(i_ - x, H_ - 0.5) * ke_.B(x / i_);
            m.s0 += v * (1.0 - x);
            m.s1 += v * x;
        }
        m.s0 *= ci_;
        m.s1 *= ci_;
        return m;
    }

    // int_{1-L}^1 over cell k = i-1
    RowMoments near_diag(double L) const {
        const QuadRule& r = gauss_jacobi01(0.0, H_ - 0.5, kQ);
        const int k = i_ - 1;
        const double f = std::pow(L, H_ + 0.5);
        RowMoments m{0.0, 0.0};
        for (int q = 0; q < kQ; ++q) {
            double x = (1.0 - L) + L * r.x[q];
            double u = k + x;
            double v = f * r.w[q] * std::pow(u, H_ - 0.5) * ke_.phi(u / i_);
            m.s0 += v * (1.0 - x);
            m.s1 += v * x;
        }
        m.s0 *= ci_;
        m.s1 *= ci_;
        return m;
    }

    RowMoments interior(int k) const {
        const QuadRule& r = gauss_legendre01(kQ);
        RowMoments m{0.0, 0.0};
        for (int q = 0; q < kQ; ++q) {
            double x = r.x[q], u = k + x;
            double v = r.w[q] * std::pow(u, H_ - 0.5) * std::pow(i_ - u, H_ - 0.5) * ke_.phi(u / i_);
            m.s0 += v * (1.0 - x);
            m.s1 += v * x;
        }
        m.s0 *= ci_;
        m.s1 *= ci_;
        return m;
    }

    // int over cell i-1 of K^2
    double diag_square() const {
        const double p = 2.0 * H_ - 1.0;
        const QuadRule& rd = gauss_jacobi01(0.0, p, kQ);
        const double c2 = ci_ * ci_;
        if (i_ >= 2) {
            double s = 0.0;
            for (int q = 0; q < kQ; ++q) {
                double u = (i_ - 1) + rd.x[q];
                double ph = ke_.phi(u / i_);
                s += rd.w[q] * std::pow(u, p) * ph * ph;
            }
            return c2 * s;
        }
        // i = 1: [0,1/2] with the phi split expanded in the square, [1/2,1] directly
        double s = 0.0;
        const double L = 0.5;
        const QuadRule& r1 = gauss_jacobi01(p, 0.0, kQ);
        const QuadRule& r2 = gauss_legendre01(kQ);
        const QuadRule& r3 = gauss_jacobi01(1.0 - 2.0 * H_, 0.0, kQ);
        for (int q = 0; q < kQ; ++q) {
            double x = L * r1.x[q], a = ke_.A(x);
            s += std::pow(L, p + 1.0) * r1.w[q] * std::pow(1.0 - x, p) * a * a;
            x = L * r2.x[q];
            s += L * r2.w[q] * std::pow(1.0 - x, p) * 2.0 * ke_.A(x) * ke_.B(x);
            x = L * r3.x[q];
            double b = ke_.B(x);
            s += std::pow(L, 2.0 - 2.0 * H_) * r3.w[q] * std::pow(1.0 - x, p) * b * b;
        }
        for (int q = 0; q < kQ; ++q) {
            double x = (1.0 - L) + L * rd.x[q];
            double ph = ke_.phi(x);
            s += std::pow(L, p + 1.0) * rd.w[q] * std::pow(x, p) * ph * ph;
        }
        return c2 * s;
    }

private:
    const KernelEval& ke_;
    int i_;
    double H_, ci_;
};

std::shared_ptr<const KernelCellWeights> build_unit_weights(int n, const HurstConfig& cfg) {
    auto out = std::make_shared<KernelCellWeights>();
    out->nodal = Eigen::MatrixXd::Zero(n + 1, n + 1);
    out->cell = Eigen::MatrixXd::Zero(n + 1, n);
    out->diag_sq = Eigen::VectorXd::Zero(n + 1);
    parallel_chunks(n, 8, [&](std::int64_t b, std::int64_t e) {
        const KernelEval& ke = kernel_eval(cfg);
        for (std::int64_t r = b; r < e; ++r) {
            const int i = static_cast<int>(r) + 1;
            RowIntegrator ri(ke, i);
            for (int k = 0; k < i; ++k) {
                RowMoments m;
                if (i == 1) {
                    RowMoments a = ri.near_zero(0.5), c = ri.near_diag(0.5);
                    m = {a.s0 + c.s0, a.s1 + c.s1};
                } else if (k == 0) {
                    m = ri.near_zero(1.0);
                } else if (k == i - 1) {
                    m = ri.near_diag(1.0);
                } else {
                    m = ri.interior(k);
                }
                out->nodal(i, k) += m.s0;
                out->nodal(i, k + 1) += m.s1;
                out->cell(i, k) = m.s0 + m.s1;
            }
            out->diag_sq[i] = ri.diag_square();
        }
    });
    return out;
}

struct WeightCache {
    std::mutex mu;
    std::map<double, std::shared_ptr<const KernelCellWeights>> unit;
    std::map<std::pair<double, int>, std::shared_ptr<const KernelCellWeights>> scaled;
};

WeightCache& weight_cache() {
    static WeightCache c;
    return c;
}

}  // namespace

double kernel_K(double t, double u, const HurstConfig& cfg) {
    if (!(u > 0.0)) throw std::invalid_argument("kernel_K: u must be > 0 (the kernel is singular at u = 0)");
    if (!(t > 0.0)) throw std::invalid_argument("kernel_K: t must be > 0");
    if (u >= t) return 0.0;
    return kernel_eval(cfg).K(t, u);
}

std::shared_ptr<const KernelCellWeights> kernel_cell_weights(const Grid& g, const HurstConfig& cfg) {
    const int n = g.n();
    auto& c = weight_cache();
    std::shared_ptr<const KernelCellWeights> unit;
    {
        std::lock_guard<std::mutex> lk(c.mu);
        auto it = c.scaled.find({cfg.H, n});
        if (it != c.scaled.end()) return it->second;
        auto u = c.unit.find(cfg.H);
        if (u != c.unit.end() && u->second->nodal.rows() >= n + 1) unit = u->second;
    }
    if (!unit) {
        unit = build_unit_weights(n, cfg);
        std::lock_guard<std::mutex> lk(c.mu);
        c.unit[cfg.H] = unit;
    }
    // K(t,u) is homogeneous of degree H-1/2 in (t,u)
    const double s1 = std::pow(g.dt(), cfg.H + 0.5), s2 = std::pow(g.dt(), 2.0 * cfg.H);
    auto w = std::make_shared<KernelCellWeights>();
    w->nodal = unit->nodal.topLeftCorner(n + 1, n + 1) * s1;
    w->cell = unit->cell.topLeftCorner(n + 1, n) * s1;
    w->diag_sq = unit->diag_sq.head(n + 1) * s2;
    std::lock_guard<std::mutex> lk(c.mu);
    if (c.scaled.size() > 16) c.scaled.clear();
    c.scaled[{cfg.H, n}] = w;
    return w;
}

KernelMatrix kernel_matrix_K(const Grid& g, const HurstConfig& cfg) {
    auto w = kernel_cell_weights(g, cfg);
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(g.size(), g.size());
    const KernelEval& ke = kernel_eval(cfg);
    for (int i = 1; i <= g.n(); ++i) {
        E(i, 0) = w->cell(i, 0) / g.dt();
        for (int j = 1; j < i; ++j) E(i, j) = ke.K(g.node(i), g.node(j));
    }
    return {g, std::move(E)};
}

SampledFn apply_K(const SampledFn& f, const HurstConfig& cfg) {
    auto w = kernel_cell_weights(f.grid, cfg);
    return SampledFn(f.grid, w->nodal * f.values);
}

SampledFn apply_K_composed(const SampledFn& f, const HurstConfig& cfg) {
    const double H = cfg.H;
    SampledFn y = weighted_op(f, 0.5 - H, 0.5 - H, FracOp::Integral, H - 0.5);
    SampledFn z = frac_integral(y, 2.0 * H);
    return SampledFn(f.grid, z.values * (cfg.c_H * std::tgamma(H + 0.5)));
}

SampledFn apply_K_inverse_c1(const SampledFn& hprime, const HurstConfig& cfg) {
    const double H = cfg.H;
    SampledFn y = weighted_op(hprime, 0.5 - H, H - 0.5, FracOp::Integral, 0.5 - H);
    return SampledFn(hprime.grid, y.values / (cfg.c_H * std::tgamma(H + 0.5)));
}

namespace {

Eigen::MatrixXd build_k_inverse(const Grid& g, const HurstConfig& cfg, CmMethod method) {
    const double H = cfg.H;
    const int n = g.n();
    const double C = 1.0 / (cfg.c_H * std::tgamma(H + 0.5));
    if (method == CmMethod::Derivative) {
        // cell slopes (h_{k+1} - h_k)/dt fed to the box-basis weighted integral
        Eigen::MatrixXd A = integral_matrix(g, 0.5 - H, 0.5 - H, H - 0.5, Basis::Cellwise);
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + 1, n + 1);
        const double s = C / g.dt();
        for (int k = 0; k < n; ++k) {
            M.col(k) -= s * A.col(k);
            M.col(k + 1) += s * A.col(k);
        }
        M.row(0).setZero();
        return M;
    }
    Eigen::MatrixXd D1 = marchaud_matrix(g, 2.0 * H);
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n + 1, n + 1);
    for (int j = 1; j <= n; ++j) E(j, j) = std::pow(g.node(j), H - 0.5);
    // t^(H-1/2) D^2H h tends to a finite nonzero constant at 0; extrapolate it linearly
    E(0, 1) = 2.0 * E(1, 1);
    E(0, 2) = -E(2, 2);
    Eigen::MatrixXd P = E * D1;
    Eigen::MatrixXd Q = marchaud_matrix(g, 0.5 - H) * P;
    for (int j = 1; j <= n; ++j) Q.row(j) *= std::pow(g.node(j), 0.5 - H);
    Q.row(0) = P.row(0) / std::tgamma(H + 0.5);
    return C * Q;
}

}  // namespace

std::shared_ptr<const Eigen::MatrixXd> k_inverse_matrix(const Grid& g, const HurstConfig& cfg, CmMethod method) {
    static std::mutex mu;
    static std::map<std::tuple<double, int, int>, std::shared_ptr<const Eigen::MatrixXd>> cache;
    auto key = std::make_tuple(cfg.H, g.n(), static_cast<int>(method));
    {
        std::lock_guard<std::mutex> lk(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto m = std::make_shared<const Eigen::MatrixXd>(build_k_inverse(g, cfg, method));
    std::lock_guard<std::mutex> lk(mu);
    if (cache.size() > 16) cache.clear();
    cache[key] = m;
    return m;
}

CmElement::CmElement(Path p, Eigen::MatrixXd pre) : h(std::move(p)), f(std::move(pre)) {
    if (f->rows() != h.dim() || f->cols() != h.grid().size())
        throw std::invalid_argument("cm element: preimage shape does not match the path");
    if (!f->allFinite()) throw std::invalid_argument("cm element: non-finite preimage");
}

CmElement CmElement::from_preimage(const Grid& g, const Eigen::MatrixXd& f, const HurstConfig& cfg) {
    if (f.cols() != g.size()) throw std::invalid_argument("cm element: preimage has wrong length");
    auto w = kernel_cell_weights(g, cfg);
    Eigen::MatrixXd h = f * w->nodal.transpose();
    return CmElement(Path(g, std::move(h)), f);
}

double l2_inner(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b, double dt) {
    const auto m = a.size();
    double s = a.dot(b) - 0.5 * (a[0] * b[0] + a[m - 1] * b[m - 1]);
    return s * dt;
}

Eigen::MatrixXd cm_preimage(const CmElement& e, const HurstConfig& cfg, CmMethod method) {
    if (!e.h.is_pinned()) throw std::invalid_argument("cm_norm: path must be pinned (h_0 = 0)");
    if (e.f) return *e.f;
    auto M = k_inverse_matrix(e.h.grid(), cfg, method);
    return e.h.samples() * M->transpose();
}

double cm_norm(const CmElement& h, const HurstConfig& cfg, CmMethod method) {
    Eigen::MatrixXd f = cm_preimage(h, cfg, method);
    const double dt = h.h.grid().dt();
    double s = 0.0;
    for (int i = 0; i < f.rows(); ++i) s += l2_inner(f.row(i).transpose(), f.row(i).transpose(), dt);
    return std::sqrt(std::max(0.0, s));
}

double cm_inner(const CmElement& h1, const CmElement& h2, const HurstConfig& cfg, CmMethod method) {
    if (h1.h.grid() != h2.h.grid() || h1.h.dim() != h2.h.dim())
        throw std::invalid_argument("cm_inner: elements live on different grids or dimensions");
    Eigen::MatrixXd f1 = cm_preimage(h1, cfg, method), f2 = cm_preimage(h2, cfg, method);
    const double dt = h1.h.grid().dt();
    double s = 0.0;
    for (int i = 0; i < f1.rows(); ++i) s += l2_inner(f1.row(i).transpose(), f2.row(i).transpose(), dt);
    return s;
}

double skorokhod_integral(const Eigen::MatrixXd& u, const Eigen::MatrixXd& dW) {
    if (u.rows() != dW.rows() || u.cols() != dW.cols() + 1)
        throw std::invalid_argument("skorokhod_integral: integrand must be d x (n+1) and dW d x n");
    return (u.leftCols(dW.cols()).array() * dW.array()).sum();
}

}  // namespace omfbm

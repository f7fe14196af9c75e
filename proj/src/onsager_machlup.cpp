#include "omfbm/onsager_machlup.hpp"

#include "omfbm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace omfbm {

namespace {

DriftField coordinatewise(std::string name, std::vector<double> params, int dim, std::function<double(int, double)> phi,
                          std::function<double(int, double)> dphi, double sup_b, double sup_db) {
    DriftField f;
    f.name = std::move(name);
    f.params = std::move(params);
    f.dim = dim;
    f.scalar = phi;
    f.dscalar = dphi;
    f.sup_b = sup_b;
    f.sup_db = sup_db;
    f.b = [phi, dim](const Eigen::VectorXd& x) {
        Eigen::VectorXd y(dim);
        for (int i = 0; i < dim; ++i) y[i] = phi(i, x[i]);
        return y;
    };
    f.jacobian = [dphi, dim](const Eigen::VectorXd& x) {
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim, dim);
        for (int i = 0; i < dim; ++i) J(i, i) = dphi(i, x[i]);
        return J;
    };
    return f;
}

void need_params(const std::string& name, const std::vector<double>& p, size_t lo, size_t hi) {
    if (p.size() < lo || p.size() > hi)
        throw std::invalid_argument("drift '" + name + "': expected " + std::to_string(lo) +
                                    (hi != lo ? ".." + std::to_string(hi) : std::string()) + " parameters, got " +
                                    std::to_string(p.size()));
    for (double v : p)
        if (!std::isfinite(v)) throw std::invalid_argument("drift '" + name + "': non-finite parameter");
}

}  // namespace

DriftField make_drift(const std::string& name, const std::vector<double>& p, int dim) {
    if (dim < 1) throw std::invalid_argument("drift: dim must be >= 1");
    const double inf = std::numeric_limits<double>::infinity();
    if (name == "zero") {
        need_params(name, p, 0, 0);
        return coordinatewise(name, p, dim, [](int, double) { return 0.0; }, [](int, double) { return 0.0; }, 0.0, 0.0);
    }
    if (name == "constant") {
        if (p.size() != 1) need_params(name, p, dim, dim);
        std::vector<double> c = p.size() == 1 ? std::vector<double>(dim, p[0]) : p;
        double mx = 0.0;
        for (double v : c) mx = std::max(mx, std::abs(v));
        return coordinatewise(name, p, dim, [c](int i, double) { return c[i]; }, [](int, double) { return 0.0; }, mx, 0.0);
    }
    if (name == "linear") {
        need_params(name, p, 1, 1);
        const double lam = p[0];
        return coordinatewise(name, p, dim, [lam](int, double x) { return -lam * x; },
                              [lam](int, double) { return -lam; }, lam == 0.0 ? 0.0 : inf, std::abs(lam));
    }
    if (name == "tanh") {
        need_params(name, p, 1, 1);
        const double k = p[0];
        if (!(k > 0.0)) throw std::invalid_argument("drift 'tanh': kappa must be positive");
        return coordinatewise(
            name, p, dim, [k](int, double x) { return k * std::tanh(x / k); },
            [k](int, double x) {
                double c = std::cosh(x / k);
                return 1.0 / (c * c);
            },
            k, 1.0);
    }
    if (name == "polynomial") {
        need_params(name, p, 1, 16);
        std::vector<double> a = p;
        size_t deg = a.size() - 1;
        while (deg > 0 && a[deg] == 0.0) --deg;
        double sb = deg == 0 ? std::abs(a[0]) : inf;
        double sdb = deg == 0 ? 0.0 : deg == 1 ? std::abs(a[1]) : inf;
        return coordinatewise(
            name, p, dim,
            [a](int, double x) {
                double s = 0.0;
                for (size_t k = a.size(); k-- > 0;) s = s * x + a[k];
                return s;
            },
            [a](int, double x) {
                double s = 0.0;
                for (size_t k = a.size(); k-- > 1;) s = s * x + k * a[k];
                return s;
            },
            sb, sdb);
    }
    throw std::invalid_argument("unknown drift '" + name + "' (zero, constant, linear, tanh, polynomial)");
}

double jacobian_check(const DriftField& drift, int points, double scale, std::uint64_t seed) {
    const int d = drift.dim;
    double worst = 0.0;
    for (int p = 0; p < points; ++p) {
        Eigen::VectorXd x(d);
        normal_fill(seed, p, 0, x.data(), d);
        x *= scale;
        Eigen::MatrixXd J = drift.jacobian(x), Jfd(d, d);
        for (int j = 0; j < d; ++j) {
            double h = 1e-5 * std::max(1.0, std::abs(x[j]));
            Eigen::VectorXd xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            Jfd.col(j) = (drift.b(xp) - drift.b(xm)) / (2.0 * h);
        }
        double den = std::max(1.0, J.cwiseAbs().maxCoeff());
        worst = std::max(worst, (J - Jfd).cwiseAbs().maxCoeff() / den);
    }
    return worst;
}

void euler_solve_1d(const DriftField& drift, int component, const double* B, double* x, int n, double dt) {
    // X = B + D with D accumulating the drift, so b = 0 reproduces B bit for bit
    double D = 0.0;
    x[0] = B[0];
    for (int i = 0; i < n; ++i) {
        D += drift.scalar(component, x[i]) * dt;
        x[i + 1] = B[i + 1] + D;
    }
}

Path euler_solve(const DriftField& drift, const Path& noise, const Grid& grid) {
    if (noise.grid() != grid) throw std::invalid_argument("euler_solve: noise lives on a different grid");
    if (noise.dim() != drift.dim) throw std::invalid_argument("euler_solve: noise and drift dimensions differ");
    if (!noise.is_pinned()) throw std::invalid_argument("euler_solve: noise must be pinned");
    const int n = grid.n(), d = drift.dim;
    const double dt = grid.dt();
    const auto& B = noise.samples();
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(d, n + 1);
    Eigen::VectorXd D = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < n; ++i) {
        D += drift.b(X.col(i)) * dt;
        X.col(i + 1) = B.col(i + 1) + D;
    }
    return Path(grid, std::move(X));
}

OmReport om_functional(const DriftField& drift, const CmElement& h, const HurstConfig& cfg) {
    const Path& p = h.h;
    if (p.dim() != drift.dim) throw std::invalid_argument("om_functional: path and drift dimensions differ");
    if (!p.is_pinned()) throw std::invalid_argument("om_functional: h must be pinned");
    const Grid& g = p.grid();
    const int n = g.n(), d = p.dim();
    const double dt = g.dt();
    Eigen::MatrixXd bh(d, n + 1);
    Eigen::VectorXd div(n + 1);
    for (int j = 0; j <= n; ++j) {
        Eigen::VectorXd x = p.samples().col(j);
        bh.col(j) = drift.b(x);
        div[j] = drift.divergence(x);
    }
    // y = h - int_0^t b(h_s) ds, cumulative trapezoid
    Eigen::MatrixXd y = p.samples();
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
    for (int j = 1; j <= n; ++j) {
        acc += 0.5 * dt * (bh.col(j - 1) + bh.col(j));
        y.col(j) -= acc;
    }
    OmReport r;
    const double cn = cm_norm(CmElement(Path(g, std::move(y))), cfg);
    r.cm_term = cn * cn;
    r.div_term = (div.sum() - 0.5 * (div[0] + div[n])) * dt;
    r.j_value = -(r.cm_term + r.div_term) / 2.0 + 0.0;  // no -0 in reports
    r.cm_norm_h = cm_norm(CmElement(p), cfg);
    return r;
}

std::string to_string(OptStatus s) {
    switch (s) {
    case OptStatus::Converged: return "converged";
    case OptStatus::BudgetExhausted: return "budget_exhausted";
    case OptStatus::LineSearchStalled: return "line_search_stalled";
    }
    return "?";
}

Eigen::MatrixXd legendre_basis(const Grid& g, int m) {
    Eigen::MatrixXd E(m, g.size());
    for (int j = 0; j < g.size(); ++j) {
        const double y = 2.0 * g.node(j) - 1.0;
        double p0 = 1.0, p1 = y;
        for (int k = 0; k < m; ++k) {
            double pk;
            if (k == 0) {
                pk = p0;
            } else if (k == 1) {
                pk = p1;
            } else {
                double p2 = ((2.0 * k - 1.0) * y * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
                pk = p2;
            }
            E(k, j) = pk * std::sqrt(2.0 * k + 1.0);
        }
    }
    return E;
}

namespace {

class Objective {
public:
    Objective(const DriftField& drift, const HurstConfig& cfg, const Grid& g, const Eigen::MatrixXd& Phi,
              const std::vector<Eigen::VectorXd>& c0, const Eigen::MatrixXd& N)
        : drift_(drift), cfg_(cfg), g_(g), Phi_(Phi), c0_(c0), N_(N) {}

    int reduced_dim() const { return static_cast<int>(N_.cols()) * drift_.dim; }

    Eigen::MatrixXd coords(const Eigen::VectorXd& z) const {
        const int d = drift_.dim, r = static_cast<int>(N_.cols());
        Eigen::MatrixXd C(d, Phi_.rows());
        for (int i = 0; i < d; ++i) C.row(i) = (c0_[i] + N_ * z.segment(i * r, r)).transpose();
        return C;
    }
    Path path(const Eigen::VectorXd& z) const { return Path(g_, coords(z) * Phi_); }

    double operator()(const Eigen::VectorXd& z) {
        ++evals;
        return -om_functional(drift_, CmElement(path(z)), cfg_).j_value;
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd& z, double fz, double step) {
        Eigen::VectorXd gr(z.size());
        for (int k = 0; k < z.size(); ++k) {
            const double h = step * std::max(1.0, std::abs(z[k]));
            Eigen::VectorXd zp = z;
            zp[k] += h;
            gr[k] = ((*this)(zp) - fz) / h;
        }
        return gr;
    }

    long evals = 0;

private:
    const DriftField& drift_;
    const HurstConfig& cfg_;
    const Grid& g_;
    const Eigen::MatrixXd& Phi_;
    const std::vector<Eigen::VectorXd>& c0_;
    const Eigen::MatrixXd& N_;
};

}  // namespace

MppResult most_probable_path(const DriftField& drift, const std::optional<Eigen::VectorXd>& endpoint,
                             const HurstConfig& cfg, const Grid& grid, const OptimizerParams& opt) {
    const int m = opt.basis_size, d = drift.dim, n = grid.n();
    if (m < 1 || m > 64) throw std::invalid_argument("mpp: basis_size must be in [1,64]");
    if (opt.max_iter < 1 || opt.max_evals < 1) throw std::invalid_argument("mpp: optimizer budget must be positive");
    if (!(opt.tol > 0.0)) throw std::invalid_argument("mpp: tol must be positive");
    if (endpoint && endpoint->size() != d) throw std::invalid_argument("mpp: endpoint dimension differs from drift");

    const Eigen::MatrixXd E = legendre_basis(grid, m);
    const Eigen::MatrixXd Phi = E * kernel_cell_weights(grid, cfg)->nodal.transpose();  // m x (n+1), rows K e_k

    std::vector<Eigen::VectorXd> c0(d, Eigen::VectorXd::Zero(m));
    Eigen::MatrixXd N;
    if (endpoint) {
        if (m < 2) throw std::invalid_argument("mpp: endpoint constraint needs basis_size >= 2");
        Eigen::VectorXd a = Phi.col(n);
        Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
        N = Q.rightCols(m - 1);
        for (int i = 0; i < d; ++i) c0[i] = a * ((*endpoint)[i] / a.squaredNorm());
    } else {
        N = Eigen::MatrixXd::Identity(m, m);
    }

    Objective F(drift, cfg, grid, Phi, c0, N);
    const int k = F.reduced_dim();
    Eigen::VectorXd z = Eigen::VectorXd::Zero(k);
    double fz = F(z);
    Eigen::VectorXd g = F.gradient(z, fz, opt.fd_step);
    Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(k, k);

    MppResult res{CmElement(F.path(z)), {}, OptStatus::BudgetExhausted, 0, 0, 0.0, {}, {}};
    res.history.push_back(fz);
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        if (g.lpNorm<Eigen::Infinity>() <= opt.tol) {
            res.status = OptStatus::Converged;
            break;
        }
        if (F.evals >= opt.max_evals) break;
        Eigen::VectorXd p = -Hinv * g;
        double slope = g.dot(p);
        if (slope >= 0.0) {
            Hinv.setIdentity();
            p = -g;
            slope = -g.squaredNorm();
        }
        double step = 1.0, fn = 0.0;
        bool ok = false;
        for (int ls = 0; ls < 50; ++ls) {
            fn = F(z + step * p);
            if (fn <= fz + 1e-4 * step * slope) {
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if (!ok) {
            res.status = OptStatus::LineSearchStalled;
            break;
        }
        Eigen::VectorXd s = step * p;
        z += s;
        Eigen::VectorXd gn = F.gradient(z, fn, opt.fd_step);
        Eigen::VectorXd y = gn - g;
        const double ys = y.dot(s);
        if (ys > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / ys;
            Eigen::MatrixXd I = Eigen::MatrixXd::Identity(k, k);
            Hinv = (I - rho * s * y.transpose()) * Hinv * (I - rho * y * s.transpose()) + rho * s * s.transpose();
        }
        g = gn;
        fz = fn;
        res.history.push_back(fz);
    }
    res.iterations = it;
    res.evaluations = F.evals;
    res.grad_norm = g.lpNorm<Eigen::Infinity>();
    res.coefficients = F.coords(z);
    Eigen::MatrixXd f = res.coefficients * E;
    res.h = CmElement(F.path(z), f);
    res.report = om_functional(drift, CmElement(res.h.h), cfg);
    return res;
}

}  // namespace omfbm

#include "omfbm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace omfbm {

Grid::Grid(int n) : n_(n) {
    if (n < 2) throw std::invalid_argument("grid: n must be >= 2, got " + std::to_string(n));
}

Eigen::VectorXd Grid::nodes() const {
    Eigen::VectorXd t(size());
    for (int j = 0; j <= n_; ++j) t[j] = node(j);
    return t;
}

Grid make_grid(int n) { return Grid(n); }

Path::Path(Grid grid, Eigen::MatrixXd samples) : grid_(grid), samples_(std::move(samples)) {
    if (samples_.rows() < 1) throw std::invalid_argument("path: dim must be >= 1");
    if (samples_.cols() != grid_.size())
        throw std::invalid_argument("path: expected " + std::to_string(grid_.size()) +
                                    " columns, got " + std::to_string(samples_.cols()));
    if (!samples_.allFinite()) throw std::invalid_argument("path: non-finite sample");
}

Path Path::zeros(const Grid& grid, int dim) {
    return Path(grid, Eigen::MatrixXd::Zero(dim, grid.size()));
}

bool Path::is_pinned() const { return (samples_.col(0).array() == 0.0).all(); }

Path Path::operator+(const Path& o) const {
    if (o.grid_ != grid_ || o.dim() != dim()) throw std::invalid_argument("path +: shape mismatch");
    return Path(grid_, samples_ + o.samples_);
}

Path Path::operator-(const Path& o) const {
    if (o.grid_ != grid_ || o.dim() != dim()) throw std::invalid_argument("path -: shape mismatch");
    return Path(grid_, samples_ - o.samples_);
}

Path Path::operator*(double c) const { return Path(grid_, samples_ * c); }

double NormKind::smallball_exponent(double H) const {
    switch (kind) {
    case Kind::Sup: return 1.0 / H;
    case Kind::Holder: return 1.0 / (H - alpha);
    case Kind::FracSobolev: break;
    }
    throw std::invalid_argument("no small-ball rescaling for the Sobolev norm");
}

NormKind parse_norm(const std::string& text) {
    auto colon = text.find(':');
    std::string name = text.substr(0, colon);
    if (name == "sup") {
        if (colon != std::string::npos) throw std::invalid_argument("norm: 'sup' takes no exponent");
        return NormKind::sup();
    }
    if (colon == std::string::npos) throw std::invalid_argument("norm: '" + name + "' needs ':alpha'");
    double a;
    try {
        size_t used = 0;
        a = std::stod(text.substr(colon + 1), &used);
        if (used != text.size() - colon - 1) throw std::invalid_argument("");
    } catch (const std::exception&) {
        throw std::invalid_argument("norm: bad exponent in '" + text + "'");
    }
    if (name == "holder") {
        if (!(a >= 0.0 && a < 1.0)) throw std::invalid_argument("norm: holder exponent must be in [0,1)");
        return a == 0.0 ? NormKind{NormKind::Kind::Holder, 0.0} : NormKind::holder(a);
    }
    if (name == "sobolev") {
        if (!(a > 0.5 && a < 1.0)) throw std::invalid_argument("norm: sobolev exponent must be in (1/2,1)");
        return NormKind::sobolev(a);
    }
    throw std::invalid_argument("norm: unknown kind '" + name + "'");
}

std::string to_string(const NormKind& k) {
    char buf[64];
    switch (k.kind) {
    case NormKind::Kind::Sup: return "sup";
    case NormKind::Kind::Holder: std::snprintf(buf, sizeof buf, "holder:%.17g", k.alpha); return buf;
    case NormKind::Kind::FracSobolev: std::snprintf(buf, sizeof buf, "sobolev:%.17g", k.alpha); return buf;
    }
    return "?";
}

double sup_norm_1d(const double* x, int size) {
    double m = 0.0;
    for (int j = 0; j < size; ++j) m = std::max(m, std::abs(x[j]));
    return m;
}

double holder_seminorm_1d(const double* x, int size, const double* w) {
    double best = 0.0;
    for (int k = 1; k < size; ++k) {
        double m = 0.0;
        const int len = size - k;
        for (int i = 0; i < len; ++i) m = std::max(m, std::abs(x[i + k] - x[i]));
        best = std::max(best, m * w[k]);
    }
    return best;
}

double sup_norm(const Path& p) {
    const auto& s = p.samples();
    if (s.rows() == 1) return sup_norm_1d(s.data(), static_cast<int>(s.cols()));
    return s.colwise().norm().maxCoeff();
}

namespace {

std::vector<double> holder_weights(const Grid& g, double alpha) {
    std::vector<double> w(g.size(), 0.0);
    for (int k = 1; k <= g.n(); ++k) w[k] = std::pow(k * g.dt(), -alpha);
    return w;
}

}  // namespace

double holder_norm(const Path& p, double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("holder_norm: alpha must be in [0,1)");
    const auto w = holder_weights(p.grid(), alpha);
    const auto& s = p.samples();
    const int m = p.grid().size();
    if (s.rows() == 1) return sup_norm(p) + holder_seminorm_1d(s.data(), m, w.data());
    double best = 0.0;
    for (int k = 1; k < m; ++k) {
        double mx = 0.0;
        for (int i = 0; i + k < m; ++i) mx = std::max(mx, (s.col(i + k) - s.col(i)).norm());
        best = std::max(best, mx * w[k]);
    }
    return sup_norm(p) + best;
}

namespace {

// Integral of tau^p over [a,b], b > a > 0.
double power_moment(double p, double a, double b) {
    if (std::abs(p + 1.0) < 1e-14) return std::log(b / a);
    return (std::pow(b, p + 1.0) - std::pow(a, p + 1.0)) / (p + 1.0);
}

}  // namespace

/*
 * Gagliardo double integral written through lags:
 *   iint |h_t - h_s|^2 / |t-s|^beta = 2 int_0^1 tau^-beta S(tau) dtau,
 *   S(tau) = int_0^{1-tau} |h_{s+tau} - h_s|^2 ds.
 * S is computed by trapezoid at the grid lags and interpolated linearly in tau; the
 * weight tau^-beta is integrated exactly cell by cell. On the first lag cell S is
 * modelled as S_1 (tau/dt)^2, which is what a differentiable path gives, so the
 * diagonal t = s is never evaluated.
 */
double frac_sobolev_norm(const Path& p, double alpha, double beta) {
    if (!(alpha > 0.5 && alpha < 1.0)) throw std::invalid_argument("frac_sobolev_norm: alpha must be in (1/2,1)");
    if (beta <= 0.0) beta = 1.0 + 2.0 * alpha;
    const Grid& g = p.grid();
    const int n = g.n();
    const double dt = g.dt();
    const auto& x = p.samples();
    std::vector<double> S(n + 1, 0.0);
    for (int k = 1; k <= n; ++k) {
        double acc = 0.0;
        const int last = n - k;
        for (int j = 0; j <= last; ++j) {
            double d2 = (x.col(j + k) - x.col(j)).squaredNorm();
            acc += (j == 0 || j == last) ? 0.5 * d2 : d2;
        }
        S[k] = last == 0 ? 0.0 : acc * dt;
    }
    double total = 0.0;
    if (beta < 3.0) total += S[1] * std::pow(dt, 1.0 - beta) / (3.0 - beta);
    for (int k = 1; k < n; ++k) {
        const double a = k * dt, b = (k + 1) * dt;
        const double m0 = power_moment(-beta, a, b);
        const double m1 = power_moment(1.0 - beta, a, b);
        const double slope = (S[k + 1] - S[k]) / dt;
        total += S[k] * m0 + slope * (m1 - a * m0);
    }
    return std::sqrt(std::max(0.0, 2.0 * total));
}

double frac_sobolev_norm(const Path& p, double alpha) { return frac_sobolev_norm(p, alpha, 0.0); }

double path_norm(const Path& p, const NormKind& k) {
    switch (k.kind) {
    case NormKind::Kind::Sup: return sup_norm(p);
    case NormKind::Kind::Holder: return holder_norm(p, k.alpha);
    case NormKind::Kind::FracSobolev: return frac_sobolev_norm(p, k.alpha);
    }
    return 0.0;
}

void write_path_csv(std::ostream& os, const Path& p) {
    os << "t";
    for (int i = 0; i < p.dim(); ++i) os << ",x" << (i + 1);
    os << "\n";
    char buf[32];
    for (int j = 0; j < p.grid().size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", p.grid().node(j));
        os << buf;
        for (int i = 0; i < p.dim(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", p.samples()(i, j));
            os << "," << buf;
        }
        os << "\n";
    }
}

Path read_path_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("path csv: empty input");
    int cols = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
    if (line.rfind("t", 0) != 0 || cols < 2) throw std::invalid_argument("path csv: header must be t,x1,...,xd");
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        std::vector<double> r;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
        if (static_cast<int>(r.size()) != cols) throw std::invalid_argument("path csv: ragged row");
        rows.push_back(std::move(r));
    }
    if (rows.size() < 3) throw std::invalid_argument("path csv: need at least 3 rows");
    Grid g(static_cast<int>(rows.size()) - 1);
    Eigen::MatrixXd s(cols - 1, g.size());
    for (int j = 0; j < g.size(); ++j) {
        if (std::abs(rows[j][0] - g.node(j)) > 1e-9)
            throw std::invalid_argument("path csv: t column is not the uniform grid on [0,1]");
        for (int i = 1; i < cols; ++i) s(i - 1, j) = rows[j][i];
    }
    return Path(g, std::move(s));
}

Path read_path_csv_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::invalid_argument("cannot open path file '" + file + "'");
    return read_path_csv(in);
}

}  // namespace omfbm

#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>

namespace omfbm {

/// Uniform partition of [0,1] with n cells.
class Grid {
public:
    explicit Grid(int n);

    int n() const { return n_; }
    int size() const { return n_ + 1; }
    double dt() const { return 1.0 / n_; }
    // j/n rather than j*dt so that the last node is exactly 1.
    double node(int j) const { return static_cast<double>(j) / n_; }
    Eigen::VectorXd nodes() const;

    bool operator==(const Grid& o) const { return n_ == o.n_; }
    bool operator!=(const Grid& o) const { return n_ != o.n_; }

private:
    int n_;
};

Grid make_grid(int n);

/// d x (n+1) samples on a grid. Immutable after construction.
class Path {
public:
    Path(Grid grid, Eigen::MatrixXd samples);

    static Path zeros(const Grid& grid, int dim);
    // Scalar path from a function of t.
    template <class F>
    static Path from_function(const Grid& grid, F&& f) {
        Eigen::MatrixXd s(1, grid.size());
        for (int j = 0; j < grid.size(); ++j) s(0, j) = f(grid.node(j));
        return Path(grid, std::move(s));
    }

    const Grid& grid() const { return grid_; }
    int dim() const { return static_cast<int>(samples_.rows()); }
    const Eigen::MatrixXd& samples() const { return samples_; }
    Eigen::VectorXd component(int i) const { return samples_.row(i).transpose(); }
    bool is_pinned() const;

    Path operator+(const Path& o) const;
    Path operator-(const Path& o) const;
    Path operator*(double c) const;

private:
    Grid grid_;
    Eigen::MatrixXd samples_;
};

struct NormKind {
    enum class Kind { Sup, Holder, FracSobolev };
    Kind kind = Kind::Sup;
    double alpha = 0.0;

    static NormKind sup() { return {Kind::Sup, 0.0}; }
    static NormKind holder(double a) { return {Kind::Holder, a}; }
    static NormKind sobolev(double a) { return {Kind::FracSobolev, a}; }

    // Exponent gamma in eps^gamma * log P for small-ball rescaling, given H.
    double smallball_exponent(double H) const;
};

// "sup", "holder:0.1", "sobolev:0.8"
NormKind parse_norm(const std::string& text);
std::string to_string(const NormKind& k);

double sup_norm(const Path& p);
double holder_norm(const Path& p, double alpha);
// Gagliardo seminorm with denominator |t-s|^(1+2 alpha).
double frac_sobolev_norm(const Path& p, double alpha);
// Explicit denominator exponent. For beta >= 3 the integral diverges on smooth paths;
// the first lag cell is then dropped and the value only reports growth under refinement.
double frac_sobolev_norm(const Path& p, double alpha, double beta);
double path_norm(const Path& p, const NormKind& k);

// Same norms on a raw scalar sample vector (length n+1), used by the Monte Carlo loops.
double sup_norm_1d(const double* x, int size);
// w[k] = (k dt)^(-alpha) for k = 1..n must be precomputed by the caller.
double holder_seminorm_1d(const double* x, int size, const double* w);

// CSV: header t,x1,...,xd, one row per node, %.17g.
void write_path_csv(std::ostream& os, const Path& p);
Path read_path_csv(std::istream& is);
Path read_path_csv_file(const std::string& file);

}  // namespace omfbm

#include "omfbm/fbm.hpp"

#include "omfbm/cameron_martin.hpp"
#include "omfbm/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace omfbm {

std::string to_string(FbmMethod m) { return m == FbmMethod::Cholesky ? "cholesky" : "volterra"; }

FbmMethod parse_fbm_method(const std::string& s) {
    if (s == "cholesky") return FbmMethod::Cholesky;
    if (s == "volterra") return FbmMethod::Volterra;
    throw std::invalid_argument("method must be 'cholesky' or 'volterra', got '" + s + "'");
}

CholeskySampler::CholeskySampler(const Grid& g, const HurstConfig& cfg) : g_(g) {
    if (g.n() > 2048) throw std::invalid_argument("cholesky sampler: n must be <= 2048");
    const CovarianceMatrix R = covariance_matrix(g, cfg.H);
    Eigen::LLT<Eigen::MatrixXd> llt(R.entries.bottomRightCorner(g.n(), g.n()));
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("cholesky sampler: covariance factorization failed");
    L_ = llt.matrixL();
}

void CholeskySampler::fill(std::uint64_t seed, std::uint64_t first, int count, int component,
                           Eigen::MatrixXd& out) const {
    const int n = g_.n();
    Eigen::MatrixXd Z(n, count);
    for (int c = 0; c < count; ++c) normal_fill(seed, first + c, static_cast<std::uint32_t>(component), Z.col(c).data(), n);
    out.resize(n + 1, count);
    out.row(0).setZero();
    out.bottomRows(n).noalias() = L_.triangularView<Eigen::Lower>() * Z;
}

FbmSample CholeskySampler::sample(int d, std::uint64_t seed, std::uint64_t index) const {
    if (d < 1) throw std::invalid_argument("sample: d must be >= 1");
    Eigen::MatrixXd s(d, g_.size()), col;
    for (int c = 0; c < d; ++c) {
        fill(seed, index, 1, c, col);
        s.row(c) = col.col(0).transpose();
    }
    return {Path(g_, std::move(s)), std::nullopt, seed, index, FbmMethod::Cholesky};
}

VolterraSampler::VolterraSampler(const Grid& g, const HurstConfig& cfg) : g_(g) {
    const int n = g.n();
    auto w = kernel_cell_weights(g, cfg);
    W_ = w->cell.bottomRows(n) / g.dt();
    s_.resize(n);
    for (int i = 1; i <= n; ++i) {
        double avg = w->cell(i, i - 1);
        s_[i - 1] = std::sqrt(std::max(0.0, w->diag_sq[i] - avg * avg / g.dt()));
    }
}

void VolterraSampler::fill(std::uint64_t seed, std::uint64_t first, int count, int component, Eigen::MatrixXd& B,
                           Eigen::MatrixXd& dW) const {
    const int n = g_.n();
    const double sd = std::sqrt(g_.dt());
    Eigen::MatrixXd xi(n, count);
    dW.resize(n, count);
    for (int c = 0; c < count; ++c) {
        normal_fill(seed, first + c, static_cast<std::uint32_t>(component), dW.col(c).data(), n);
        normal_fill(seed, first + c, kAuxStream + static_cast<std::uint32_t>(component), xi.col(c).data(), n);
    }
    dW *= sd;
    B.resize(n + 1, count);
    B.row(0).setZero();
    B.bottomRows(n).noalias() = W_.triangularView<Eigen::Lower>() * dW;
    B.bottomRows(n) += s_.asDiagonal() * xi;
}

Eigen::VectorXd VolterraSampler::path_from(const Eigen::VectorXd& dW, const Eigen::VectorXd& xi) const {
    const int n = g_.n();
    if (dW.size() != n || xi.size() != n) throw std::invalid_argument("path_from: need n increments and n aux variates");
    Eigen::VectorXd B(n + 1);
    B[0] = 0.0;
    B.tail(n) = W_.triangularView<Eigen::Lower>() * dW + s_.cwiseProduct(xi);
    return B;
}

FbmSample VolterraSampler::sample(int d, std::uint64_t seed, std::uint64_t index) const {
    if (d < 1) throw std::invalid_argument("sample: d must be >= 1");
    Eigen::MatrixXd s(d, g_.size()), dWall(d, g_.n()), B, dW;
    for (int c = 0; c < d; ++c) {
        fill(seed, index, 1, c, B, dW);
        s.row(c) = B.col(0).transpose();
        dWall.row(c) = dW.col(0).transpose();
    }
    return {Path(g_, std::move(s)), std::move(dWall), seed, index, FbmMethod::Volterra};
}

FbmSample sample_cholesky(const Grid& g, const HurstConfig& cfg, int d, std::uint64_t seed, std::uint64_t index) {
    return CholeskySampler(g, cfg).sample(d, seed, index);
}

FbmSample sample_volterra(const Grid& g, const HurstConfig& cfg, int d, std::uint64_t seed, std::uint64_t index) {
    return VolterraSampler(g, cfg).sample(d, seed, index);
}

Eigen::MatrixXd empirical_covariance(const Eigen::MatrixXd& values) {
    const auto N = values.cols();
    if (N < 2) throw std::invalid_argument("empirical_covariance: need at least 2 samples");
    Eigen::VectorXd mean = values.rowwise().mean();
    Eigen::MatrixXd c = values.colwise() - mean;
    return (c * c.transpose()) / double(N - 1);
}

Eigen::MatrixXd empirical_covariance(const std::vector<FbmSample>& samples, const std::vector<int>& nodes) {
    if (samples.size() < 2) throw std::invalid_argument("empirical_covariance: need at least 2 samples");
    const Grid& g = samples[0].path.grid();
    const int d = samples[0].path.dim();
    for (const auto& s : samples)
        if (s.path.grid() != g || s.path.dim() != d)
            throw std::invalid_argument("empirical_covariance: samples on different grids or dimensions");
    for (int j : nodes)
        if (j < 0 || j > g.n()) throw std::invalid_argument("empirical_covariance: node index out of range");
    const int m = static_cast<int>(nodes.size());
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
    Eigen::MatrixXd vals(m, samples.size());
    for (int c = 0; c < d; ++c) {
        for (size_t s = 0; s < samples.size(); ++s)
            for (int a = 0; a < m; ++a) vals(a, s) = samples[s].path.samples()(c, nodes[a]);
        acc += empirical_covariance(vals);
    }
    return acc / d;
}

}  // namespace omfbm

#pragma once

#include "omfbm/grid.hpp"
#include "omfbm/special.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace omfbm {

enum class FbmMethod { Cholesky, Volterra };
std::string to_string(FbmMethod m);
FbmMethod parse_fbm_method(const std::string& s);

struct FbmSample {
    Path path;                         // d x (n+1), pinned
    std::optional<Eigen::MatrixXd> dW; // d x n, Volterra only
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
    FbmMethod method = FbmMethod::Cholesky;
};

// Random stream ids. Component c of sample `index` draws from stream c (plus an offset
// for the auxiliary Volterra variates), so d-dimensional draws extend 1-d ones.
constexpr std::uint32_t kAuxStream = 0x8000u;

/// Exact sampling on the grid from the Cholesky factor of the interior covariance.
class CholeskySampler {
public:
    CholeskySampler(const Grid& g, const HurstConfig& cfg);

    // out is (n+1) x count, column c = component `component` of sample first+c.
    void fill(std::uint64_t seed, std::uint64_t first, int count, int component, Eigen::MatrixXd& out) const;
    FbmSample sample(int d, std::uint64_t seed, std::uint64_t index = 0) const;
    const Grid& grid() const { return g_; }

private:
    Grid g_;
    Eigen::MatrixXd L_;
};

/*
 * B(t_i) = sum_{j<i} w_ij dW_j + s_i xi_i, where w_ij is the average of K(t_i, .) over
 * cell j and s_i xi_i carries the part of int_{cell i-1} K(t_i,u) dW_u orthogonal to
 * dW_{i-1} (xi_i iid N(0,1), independent of dW). Without that term the steep
 * (t-u)^(H-1/2) end of the kernel loses a few percent of variance at moderate n.
 */
class VolterraSampler {
public:
    VolterraSampler(const Grid& g, const HurstConfig& cfg);

    // B is (n+1) x count, dW is n x count.
    void fill(std::uint64_t seed, std::uint64_t first, int count, int component, Eigen::MatrixXd& B,
              Eigen::MatrixXd& dW) const;
    // Path from given increments and auxiliary variates (both length n). Used as a test hook.
    Eigen::VectorXd path_from(const Eigen::VectorXd& dW, const Eigen::VectorXd& xi) const;
    FbmSample sample(int d, std::uint64_t seed, std::uint64_t index = 0) const;

    const Eigen::MatrixXd& weights() const { return W_; }  // n x n, row i-1 <-> t_i
    const Eigen::VectorXd& aux_scale() const { return s_; }
    const Grid& grid() const { return g_; }

private:
    Grid g_;
    Eigen::MatrixXd W_;
    Eigen::VectorXd s_;
};

FbmSample sample_cholesky(const Grid& g, const HurstConfig& cfg, int d, std::uint64_t seed, std::uint64_t index = 0);
FbmSample sample_volterra(const Grid& g, const HurstConfig& cfg, int d, std::uint64_t seed, std::uint64_t index = 0);

// Unbiased covariance over samples at the given node indices, averaged across components.
Eigen::MatrixXd empirical_covariance(const std::vector<FbmSample>& samples, const std::vector<int>& nodes);

// Same from a node x sample matrix (one component); the streaming form used for large N.
Eigen::MatrixXd empirical_covariance(const Eigen::MatrixXd& values);

}  // namespace omfbm

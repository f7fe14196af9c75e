#pragma once

#include <array>
#include <cstdint>

namespace omfbm {

// Philox4x32-10 (Salmon et al. 2011). Stateless: the output is a function of key and counter.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::uint64_t key);

// Inverse of the standard normal CDF (Wichura's AS241, about 1e-16 relative).
double normal_quantile(double p);

/*
 * Standard normals for a (seed, index, stream) triple: out[k] is the k-th variate of
 * that stream. The same triple always yields the same numbers regardless of how
 * many threads produced neighbouring streams.
 */
void normal_fill(std::uint64_t seed, std::uint64_t index, std::uint32_t stream, double* out, int count);

// Uniform on (0,1), same addressing.
void uniform_fill(std::uint64_t seed, std::uint64_t index, std::uint32_t stream, double* out, int count);

}  // namespace omfbm

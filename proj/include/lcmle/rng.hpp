#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace lcmle {

using Rng = std::mt19937_64;

// Independent, reproducible stream derived from a master seed and a name
// ("fit", "sample", "partition", ...).
Rng make_stream(std::uint64_t seed, std::string_view name);

// Child stream drawn from a parent; used for concurrent chains.
Rng split(Rng& parent);

double uniform01(Rng& rng);

// Uniform direction on the unit sphere in dimension `dim`.
Eigen::VectorXd random_direction(Rng& rng, int dim);

}  // namespace lcmle

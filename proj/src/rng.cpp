#include "lcmle/rng.hpp"
#include "lcmle/error.hpp"

namespace lcmle {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::OutsideHull: return "OutsideHull";
    case ErrorKind::DegenerateChord: return "DegenerateChord";
    case ErrorKind::StuckChain: return "StuckChain";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::VanishingLevelSet: return "VanishingLevelSet";
    case ErrorKind::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorKind::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Error";
}

Rng make_stream(std::uint64_t seed, std::string_view name) {
  const std::uint64_t tag = fnv1a(name);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  return Rng(seq);
}

Rng split(Rng& parent) {
  const std::uint64_t a = parent();
  const std::uint64_t b = parent();
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

double uniform01(Rng& rng) {
  // 53 random bits -> [0, 1)
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Eigen::VectorXd random_direction(Rng& rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd u(dim);
  for (;;) {
    for (int i = 0; i < dim; ++i) u[i] = normal(rng);
    const double norm = u.norm();
    if (norm > 1e-12) return u / norm;
  }
}

}  // namespace lcmle

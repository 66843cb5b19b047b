#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "koopman/types.hpp"

namespace koopman {

/// Discrete-time map x+ = T(x) on R^n.
struct DynamicalSystem {
  int state_dim = 0;
  std::function<Vector(const Vector&)> map;
  std::string name;
};

/// The 1-D contraction x+ = 0.5 x.
DynamicalSystem linear05();

/// 1-D polynomial map x+ = sum_k coeffs[k] * x^k.
DynamicalSystem scalar_polynomial(std::vector<double> coeffs);

/// Paired snapshot matrices: row i of Y is the image of row i of X under the
/// generating map. Immutable value type; metadata records provenance.
struct SnapshotData {
  Matrix X;
  Matrix Y;
  std::string system;        ///< generating system name ("" when loaded untagged)
  std::uint64_t seed = 0;    ///< RNG seed used for the initial conditions
  int steps = 0;             ///< snapshot pairs per trajectory
  std::string domain;        ///< sampling-domain tag, e.g. "uniform[-2,2]"

  Eigen::Index size() const noexcept { return X.rows(); }
  int state_dim() const noexcept { return static_cast<int>(X.cols()); }
};

/// Roll each initial state forward `steps` times, emitting every consecutive
/// pair (x_k, x_{k+1}) as one snapshot row; N = initials.size() * steps.
/// Throws SimulationError (with trajectory and step) on non-finite states.
SnapshotData simulate_snapshots(const DynamicalSystem& system,
                                const std::vector<Vector>& initials, int steps);

/// Reproducible uniform samples from the box [low, high): same seed, same
/// output. Uses mt19937_64 with the 53-bit mantissa mapping so the stream is
/// fixed by the engine, not the standard library's distribution.
std::vector<Vector> sample_uniform_initials(const Vector& low, const Vector& high,
                                            int count, std::uint64_t seed);

/// Reference dataset: 500 initial conditions uniform on [-2, 2], two steps
/// each along x+ = 0.5x, giving N = 1000 snapshot pairs.
SnapshotData example1_dataset(std::uint64_t seed);

}  // namespace koopman

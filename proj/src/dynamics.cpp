#include "koopman/dynamics.hpp"

#include <cmath>
#include <random>
#include <utility>

#include "koopman/errors.hpp"

namespace koopman {

DynamicalSystem linear05() {
  DynamicalSystem sys;
  sys.state_dim = 1;
  sys.name = "linear05";
  sys.map = [](const Vector& x) { return Vector(0.5 * x); };
  return sys;
}

DynamicalSystem scalar_polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) throw DomainError("polynomial map needs at least one coefficient");
  DynamicalSystem sys;
  sys.state_dim = 1;
  sys.name = "custom-poly";
  sys.map = [coeffs = std::move(coeffs)](const Vector& x) {
    double acc = 0.0;
    // Horner evaluation, highest degree first.
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x(0) + *it;
    Vector y(1);
    y(0) = acc;
    return y;
  };
  return sys;
}

SnapshotData simulate_snapshots(const DynamicalSystem& system,
                                const std::vector<Vector>& initials, int steps) {
  if (steps < 1) throw DomainError("steps per trajectory must be at least 1");
  if (initials.empty()) throw DomainError("at least one initial state is required");
  const int n = system.state_dim;
  const auto total = static_cast<Eigen::Index>(initials.size()) * steps;

  SnapshotData data;
  data.X.resize(total, n);
  data.Y.resize(total, n);
  data.system = system.name;
  data.steps = steps;

  Eigen::Index row = 0;
  for (std::size_t traj = 0; traj < initials.size(); ++traj) {
    Vector x = initials[traj];
    if (x.size() != n)
      throw DomainError("initial state " + std::to_string(traj) +
                        " has wrong dimension");
    for (int k = 0; k < steps; ++k) {
      Vector y = system.map(x);
      if (y.size() != n || !y.allFinite())
        throw SimulationError("map produced a non-finite or mis-sized state", traj,
                              static_cast<std::size_t>(k));
      data.X.row(row) = x.transpose();
      data.Y.row(row) = y.transpose();
      x = std::move(y);
      ++row;
    }
  }
  return data;
}

std::vector<Vector> sample_uniform_initials(const Vector& low, const Vector& high,
                                            int count, std::uint64_t seed) {
  if (low.size() != high.size())
    throw DomainError("sampling box bounds have different dimensions");
  if (count < 1) throw DomainError("sample count must be at least 1");
  for (Eigen::Index k = 0; k < low.size(); ++k)
    if (!(low(k) < high(k)))
      throw DomainError("sampling box is empty: low must be strictly below high "
                        "in every component");

  std::mt19937_64 rng(seed);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Vector x(low.size());
    for (Eigen::Index k = 0; k < low.size(); ++k) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
      x(k) = low(k) + u * (high(k) - low(k));
    }
    out.push_back(std::move(x));
  }
  return out;
}

SnapshotData example1_dataset(std::uint64_t seed) {
  Vector low(1), high(1);
  low(0) = -2.0;
  high(0) = 2.0;
  SnapshotData data =
      simulate_snapshots(linear05(), sample_uniform_initials(low, high, 500, seed), 2);
  data.seed = seed;
  data.domain = "uniform[-2,2]";
  return data;
}

}  // namespace koopman

#pragma once

#include <optional>
#include <vector>

#include "koopman/dictionary.hpp"
#include "koopman/types.hpp"

namespace koopman {

/// Per-alpha results of sweeping the dictionary family
/// D_alpha = [d1, d1 + alpha * d2] over a fixed snapshot set. All vectors
/// share the grid's length; rows where the full-rank assumption failed carry
/// NaN and ok[i] = false.
struct SweepResult {
  std::vector<double> alphas;
  std::vector<double> residual;           ///< E(alpha)
  std::vector<double> relative_residual;  ///< E_rel(alpha)
  std::vector<double> sqrt_consistency;   ///< sqrt(Ic)(alpha)
  std::vector<ComplexVector> spectra;     ///< forward-matrix spectrum per alpha
  std::vector<bool> ok;
};

/// Logarithmically spaced grid with exact endpoints; count == 1 yields {lo}.
std::vector<double> log_spaced_grid(double lo, double hi, int count);

/// The basis change realizing D_alpha from a two-function dictionary:
/// [[1, 1], [0, alpha]].
Matrix alpha_family_transform(double alpha);

/// Run the sweep. `base` must have exactly two functions. Iterations are
/// independent; `max_threads` caps the worker count (0 = hardware default).
/// Output order and values are deterministic regardless of thread count.
SweepResult run_alpha_sweep(const Dictionary& base,
                            const Eigen::Ref<const Matrix>& X,
                            const Eigen::Ref<const Matrix>& Y,
                            double alpha_min, double alpha_max, int count,
                            std::optional<double> rank_tolerance = std::nullopt,
                            int max_threads = 0);

}  // namespace koopman

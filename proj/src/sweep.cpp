#include "koopman/sweep.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "koopman/consistency.hpp"
#include "koopman/edmd.hpp"
#include "koopman/errors.hpp"

namespace koopman {

std::vector<double> log_spaced_grid(double lo, double hi, int count) {
  if (count < 1) throw DomainError("grid needs at least one point");
  if (!(lo > 0.0) || !(hi > 0.0) || lo > hi)
    throw DomainError("log-spaced grid needs 0 < lo <= hi");
  std::vector<double> grid(static_cast<std::size_t>(count));
  grid.front() = lo;
  if (count == 1) return grid;
  const double step = (std::log(hi) - std::log(lo)) / (count - 1);
  for (int i = 1; i + 1 < count; ++i)
    grid[static_cast<std::size_t>(i)] = std::exp(std::log(lo) + i * step);
  grid.back() = hi;
  return grid;
}

Matrix alpha_family_transform(double alpha) {
  Matrix R(2, 2);
  R << 1.0, 1.0, 0.0, alpha;
  return R;
}

SweepResult run_alpha_sweep(const Dictionary& base,
                            const Eigen::Ref<const Matrix>& X,
                            const Eigen::Ref<const Matrix>& Y,
                            double alpha_min, double alpha_max, int count,
                            std::optional<double> rank_tolerance, int max_threads) {
  if (base.size() != 2)
    throw DomainError("the alpha family is defined for two-function dictionaries "
                      "(got " + std::to_string(base.size()) + ")");

  SweepResult result;
  result.alphas = log_spaced_grid(alpha_min, alpha_max, count);
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  result.residual.assign(result.alphas.size(), nan);
  result.relative_residual.assign(result.alphas.size(), nan);
  result.sqrt_consistency.assign(result.alphas.size(), nan);
  result.spectra.resize(result.alphas.size());
  result.ok.assign(result.alphas.size(), false);

  // Evaluate the base once; every D_alpha is a 2x2 recombination of it.
  const DataMatrix base_dx = base(X);
  const DataMatrix base_dy = base(Y);

  auto run_one = [&](std::size_t i) {
    const Matrix R = alpha_family_transform(result.alphas[i]);
    try {
      BasisTransform t(R);
      EdmdModel model = fit_forward_backward(base_dx * t.matrix(),
                                             base_dy * t.matrix(), rank_tolerance);
      const ResidualError err = residual_error(model);
      const auto [ic, angles] =
          consistency_index(model.DX, model.DY, rank_tolerance);
      (void)angles;
      result.residual[i] = err.absolute;
      result.relative_residual[i] = err.relative;
      result.sqrt_consistency[i] = std::sqrt(ic);
      result.spectra[i] = edmd_eigenpairs(model).eigenvalues;
      result.ok[i] = true;
    } catch (const AssumptionError&) {
      // Row stays flagged; the sweep continues.
    } catch (const TransformError&) {
    }
  };

  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  std::size_t workers = max_threads > 0 ? static_cast<std::size_t>(max_threads)
                                        : static_cast<std::size_t>(hw);
  workers = std::min(workers, result.alphas.size());
  workers = std::max<std::size_t>(workers, 1);

  if (workers == 1) {
    for (std::size_t i = 0; i < result.alphas.size(); ++i) run_one(i);
    return result;
  }

  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> failures(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < result.alphas.size(); i += workers) run_one(i);
      } catch (...) {
        failures[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);
  return result;
}

}  // namespace koopman

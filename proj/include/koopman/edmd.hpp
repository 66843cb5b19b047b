#pragma once

#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "koopman/dictionary.hpp"
#include "koopman/errors.hpp"
#include "koopman/types.hpp"

namespace koopman {

/// Numerical-rank diagnostic of a data matrix.
struct RankReport {
  Eigen::Index numerical_rank = 0;
  Vector singular_values;      ///< descending
  double rank_tolerance = 0.0; ///< absolute threshold applied to singular values
  bool full_column_rank = false;
};

/// The full-column-rank requirement on an evaluated dictionary matrix failed.
class AssumptionError : public std::runtime_error {
 public:
  AssumptionError(const std::string& what, RankReport report, std::string which)
      : std::runtime_error(what), report_(std::move(report)), which_(std::move(which)) {}

  const RankReport& rank_report() const noexcept { return report_; }
  /// Which data matrix is deficient ("D(X)" or "D(Y)").
  const std::string& which_matrix() const noexcept { return which_; }

 private:
  RankReport report_;
  std::string which_;
};

/// Numerical rank via singular values. The default tolerance is
/// max(N, N_d) * machine epsilon * sigma_max; pass `tolerance` to override
/// with an absolute threshold. Diagnostic only: never throws on deficiency.
RankReport check_full_rank(const Eigen::Ref<const DataMatrix>& M,
                           std::optional<double> tolerance = std::nullopt);

/// Least-squares solution K = DX^+ DY minimizing ||DY - DX*K||_F, computed
/// through a rank-revealing factorization (SVD); the normal equations are
/// never formed. Throws AssumptionError (carrying the RankReport) when DX is
/// column-rank deficient and DomainError on shape mismatch.
Matrix edmd_solve(const Eigen::Ref<const DataMatrix>& DX,
                  const Eigen::Ref<const DataMatrix>& DY,
                  std::optional<double> rank_tolerance = std::nullopt);

/// Forward and backward least-squares models on one snapshot set.
/// Immutable after fitting and shareable across threads.
struct EdmdModel {
  Matrix Kf;  ///< minimizes ||D(Y) - D(X) K||_F
  Matrix Kb;  ///< minimizes ||D(X) - D(Y) K||_F
  DataMatrix DX;
  DataMatrix DY;
  RankReport rank_x;
  RankReport rank_y;
  std::shared_ptr<const Dictionary> dict;  ///< null when fitted from raw data matrices

  Eigen::Index dictionary_size() const noexcept { return Kf.rows(); }
};

/// Fit both directions from already-evaluated data matrices. Both matrices
/// must have full column rank; the error names the deficient one.
EdmdModel fit_forward_backward(DataMatrix DX, DataMatrix DY,
                               std::optional<double> rank_tolerance = std::nullopt);

/// Evaluate the dictionary on the paired state matrices and fit.
EdmdModel fit_forward_backward(const Dictionary& dict,
                               const Eigen::Ref<const Matrix>& X,
                               const Eigen::Ref<const Matrix>& Y,
                               std::optional<double> rank_tolerance = std::nullopt);

/// One-step predictor for the function f(.) = D(.) v: evaluates D(x) * Kf * v.
struct Predictor {
  ComplexVector coefficients;  ///< Kf * v
  std::shared_ptr<const Dictionary> dict;

  std::complex<double> operator()(const Vector& state) const;
  ComplexVector evaluate(const Eigen::Ref<const Matrix>& states) const;
};

Predictor predict(const EdmdModel& model, const Eigen::Ref<const ComplexVector>& v);

/// Frobenius residual of the forward fit and its normalization by ||D(Y)||_F.
struct ResidualError {
  double absolute = 0.0;  ///< E  = ||D(Y) - D(X) Kf||_F
  double relative = 0.0;  ///< E / ||D(Y)||_F
};

ResidualError residual_error(const EdmdModel& model);

/// Eigendecomposition of the forward matrix, sorted by descending |lambda|
/// (ties: descending real part, then imaginary part). Column i of `vectors`
/// pairs with eigenvalues(i); D(.) * vectors.col(i) approximates an
/// eigenfunction of the underlying operator. `ill_conditioned` flags an
/// eigenvector matrix with condition number above 1e12.
struct Eigenpairs {
  ComplexVector eigenvalues;
  ComplexMatrix vectors;
  bool ill_conditioned = false;
};

Eigenpairs edmd_eigenpairs(const EdmdModel& model);

/// Model export: { "Kf": rows, "Kb": rows, "Nd": int, "rank": {...} },
/// row-major, full double precision.
nlohmann::json to_json(const EdmdModel& model);

/// Rebuild a model from its JSON export. The data matrices are not part of
/// the schema, so the result carries empty DX/DY.
EdmdModel model_from_json(const nlohmann::json& j);

}  // namespace koopman

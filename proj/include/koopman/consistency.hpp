#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "koopman/edmd.hpp"
#include "koopman/types.hpp"

namespace koopman {

/// How the consistency spectrum was obtained.
///  - Orthonormalized: eigenvalues of the symmetric N_d x N_d form
///    I - G G^T with G = Qx^T Qy, via the singular values of G. Default;
///    never touches an N x N matrix.
///  - Direct: general eigensolve of M_C = I - Kf Kb as defined. Retained as a
///    cross-check path.
enum class ConsistencyPath { Orthonormalized, Direct };

/// Orthonormalized cross-Gram of the two data-matrix ranges. The singular
/// values are the cosines of the principal angles between R(D(X)) and
/// R(D(Y)); the consistency index equals 1 - sigma_min^2.
struct PrincipalAngleData {
  Matrix gram;             ///< G = Qx^T Qy, N_d x N_d
  Vector singular_values;  ///< descending, all in [0, 1] up to roundoff
};

/// Everything the forward-backward analysis certifies about one model.
struct ConsistencyReport {
  Matrix Mc;                ///< I - Kf Kb
  double Ic = 0.0;          ///< spectral radius of Mc, clamped to [0, 1]
  double sqrt_Ic = 0.0;     ///< worst-case relative RMS one-step prediction error
  Vector eigenvalues;       ///< raw spectrum, descending (clamping not applied)
  Vector worst_case_v;      ///< unit coefficients attaining the bound
  double worst_case_rrmse = 0.0;
  std::string computation_path;  ///< "orthonormalized" or "direct"
};

/// The consistency matrix I - Kf Kb, exactly as defined. Zero iff the forward
/// and backward models invert each other on the data.
Matrix consistency_matrix(const EdmdModel& model);

/// Consistency index from the data matrices alone: with thin orthonormal
/// factors Qx, Qy and G = Qx^T Qy, returns 1 - sigma_min(G)^2 clamped to
/// [0, 1], together with the principal-angle data. Agrees with the spectral
/// radius of consistency_matrix to solver precision.
std::pair<double, PrincipalAngleData> consistency_index(
    const Eigen::Ref<const DataMatrix>& DX, const Eigen::Ref<const DataMatrix>& DY,
    std::optional<double> rank_tolerance = std::nullopt);

constexpr Eigen::Index kProjectionSizeGuard = 2000;

/// Spectral radius of the explicit projection difference
/// Py - Px = DY DY^+ - DX DX^+ (N x N, symmetric). Equals sqrt(Ic); kept as
/// an independent cross-check of the N_d x N_d path. Throws SizeError above
/// the guard since the matrix is N x N.
double projection_difference_sprad(const Eigen::Ref<const DataMatrix>& DX,
                                   const Eigen::Ref<const DataMatrix>& DY,
                                   Eigen::Index size_guard = kProjectionSizeGuard);

/// Relative root mean square one-step prediction error of f(.) = D(.) v over
/// the snapshot set: ||DY v - DX Kf v|| / ||DY v||. Complex coefficients
/// supported. Throws DegenerateFunctionError when DY v is numerically zero.
double rrmse(const EdmdModel& model, const Eigen::Ref<const ComplexVector>& v);
double rrmse(const EdmdModel& model, const Eigen::Ref<const Vector>& v);

/// Certificate that the sqrt(Ic) bound is attained: real unit coefficients
/// v* with rrmse(model, v*) = sqrt(Ic) to solver precision. Built from the
/// minimal right singular vector c of G by solving Ry v* = c; covers the
/// boundary cases uniformly (Ic = 0: any direction certifies 0; Ic = 1:
/// D(Y) v* is orthogonal to R(D(X))). Sign convention: first nonzero entry
/// nonnegative.
struct WorstCase {
  Vector coefficients;
  double rrmse = 0.0;
};

WorstCase worst_case_function(const EdmdModel& model);

/// Max RRMSE over `samples` random complex coefficient directions,
/// evaluated through the precomputed N_d x N_d quadratic forms
/// (v^H Res^T Res v) / (v^H DY^T DY v); a sampling lower bound for the
/// worst case. Deterministic for a fixed seed.
double sample_max_rrmse(const EdmdModel& model, int samples, std::uint64_t seed);

/// Full report via the orthonormalized path (or the direct one on request).
ConsistencyReport analyze_consistency(
    const EdmdModel& model, ConsistencyPath path = ConsistencyPath::Orthonormalized);

/// Numerical check that the consistency spectrum depends only on span(D):
/// fits the model for D and for D*R and reports the similarity defect
/// ||Mc~ - R^-1 Mc R||_F / max(1, ||Mc||_F) together with the Hausdorff
/// distance between the two spectra. Both below `tolerance` is a pass.
struct BasisInvarianceReport {
  double similarity_defect = 0.0;
  double spectrum_distance = 0.0;
  bool pass = false;
};

BasisInvarianceReport verify_basis_invariance(const Dictionary& dict,
                                              const Eigen::Ref<const Matrix>& X,
                                              const Eigen::Ref<const Matrix>& Y,
                                              const BasisTransform& transform,
                                              double tolerance = 1e-8);

/// L2 norm under the uniform atomic measure on the samples:
/// sqrt((1/N) sum |values_i|^2).
double empirical_l2_norm(const Eigen::Ref<const ComplexVector>& values);
double empirical_l2_norm(const Eigen::Ref<const Vector>& values);

/// Report serialization:
/// { "Ic", "sqrtIc", "eigenvalues", "worstCaseV", "worstCaseRrmse", "path" }.
nlohmann::json to_json(const ConsistencyReport& report);

}  // namespace koopman

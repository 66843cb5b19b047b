#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "koopman/types.hpp"

namespace koopman {

/// Invertible change of basis for a dictionary, D~(.) = D(.) * R.
///
/// Invertibility is verified at construction: the reciprocal condition
/// estimate sigma_min/sigma_max must be at least 1e-12, otherwise the
/// downstream similarity identities degrade and a TransformError is thrown.
class BasisTransform {
 public:
  explicit BasisTransform(Matrix R);

  static BasisTransform identity(Eigen::Index n);

  const Matrix& matrix() const noexcept { return R_; }
  double rcond() const noexcept { return rcond_; }
  Eigen::Index size() const noexcept { return R_.rows(); }

  static constexpr double kMinRcond = 1e-12;

 private:
  Matrix R_;
  double rcond_;
};

/// An ordered family of N_d scalar observables on R^n, evaluable on batches
/// of states (one state per row).
///
/// Functions are stored as base closures together with a combination matrix,
/// so linear changes of basis compose symbolically: transforming twice
/// multiplies the stored matrix instead of nesting closures. Dictionaries are
/// immutable after construction and safe for concurrent read-only use.
class Dictionary {
 public:
  using Fn = std::function<double(const Vector&)>;

  /// Dictionary whose functions are the given closures themselves.
  Dictionary(int state_dim, std::vector<Fn> functions,
             std::vector<std::string> labels = {});

  /// Dictionary of monomials x1^e1 * ... * xn^en, one per exponent
  /// multi-index, in the given order. Labels are generated.
  static Dictionary monomials(int state_dim,
                              const std::vector<std::vector<int>>& exponents);

  int state_dim() const noexcept { return state_dim_; }
  Eigen::Index size() const noexcept { return combine_.cols(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Evaluate on a batch of states (N x n); returns the N x N_d data matrix
  /// with row i equal to D(x_i). Throws DomainError on a state-dimension
  /// mismatch and NumericError (naming row and column) on non-finite output.
  DataMatrix operator()(const Eigen::Ref<const Matrix>& states) const;

  /// Evaluate a single state; returns the 1 x N_d row D(x).
  Eigen::RowVectorXd row(const Vector& state) const;

  /// Change of basis D~(.) = D(.) * R. The result shares the base closures.
  Dictionary transformed(const BasisTransform& transform) const;

  /// New dictionary whose function i is sum_j coefficients(i, j) * d_j.
  /// `coefficients` has one row per new function; no invertibility is
  /// required (the new family may have fewer members than the old one).
  Dictionary combined(const Eigen::Ref<const Matrix>& coefficients) const;

  /// Exponent multi-indices when the base functions are monomials.
  const std::optional<std::vector<std::vector<int>>>& monomial_exponents() const noexcept {
    return exponents_;
  }

 private:
  Dictionary() = default;

  int state_dim_ = 0;
  std::vector<Fn> base_;
  Matrix combine_;  // N_base x N_d; D(x) = B(x) * combine_
  std::vector<std::string> labels_;
  std::optional<std::vector<std::vector<int>>> exponents_;
};

/// Build a dictionary from its JSON description:
///   { "n": int,
///     "monomials": [[e1,...,en], ...],
///     "combine":   optional N_d x N_monomials row-major array,
///     "transform": optional N_d x N_d row-major array }
/// "combine" rows are coefficients of each function over the monomial list;
/// when absent the functions are the monomials themselves. "transform" is an
/// invertible change of basis applied last.
Dictionary dictionary_from_json(const nlohmann::json& spec);

/// Load a dictionary description from a JSON file.
Dictionary load_dictionary(const std::string& path);

}  // namespace koopman

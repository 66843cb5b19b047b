#include "koopman/dictionary.hpp"

#include <cmath>
#include <fstream>
#include <utility>

#include "koopman/errors.hpp"

namespace koopman {

namespace {

double int_pow(double x, int e) {
  double p = 1.0;
  for (int k = 0; k < e; ++k) p *= x;
  return p;
}

std::string monomial_label(const std::vector<int>& exps) {
  const int n = static_cast<int>(exps.size());
  std::string out;
  for (int k = 0; k < n; ++k) {
    if (exps[k] == 0) continue;
    if (!out.empty()) out += "*";
    out += (n == 1) ? "x" : "x" + std::to_string(k + 1);
    if (exps[k] != 1) out += "^" + std::to_string(exps[k]);
  }
  return out.empty() ? "1" : out;
}

bool is_identity(const Matrix& M) {
  if (M.rows() != M.cols()) return false;
  return M == Matrix::Identity(M.rows(), M.cols());
}

std::vector<std::string> generic_labels(Eigen::Index count) {
  std::vector<std::string> out(static_cast<std::size_t>(count));
  for (Eigen::Index j = 0; j < count; ++j)
    out[static_cast<std::size_t>(j)] = "f" + std::to_string(j + 1);
  return out;
}

}  // namespace

BasisTransform::BasisTransform(Matrix R) : R_(std::move(R)) {
  if (R_.size() == 0 || R_.rows() != R_.cols())
    throw DomainError("basis transform must be a nonempty square matrix");
  Eigen::JacobiSVD<Matrix> svd(R_);
  const auto& sv = svd.singularValues();
  rcond_ = sv(0) > 0.0 ? sv(sv.size() - 1) / sv(0) : 0.0;
  if (!(rcond_ >= kMinRcond))
    throw TransformError("basis transform is singular or ill-conditioned "
                         "(reciprocal condition " + std::to_string(rcond_) +
                         " below 1e-12)", rcond_);
}

BasisTransform BasisTransform::identity(Eigen::Index n) {
  return BasisTransform(Matrix::Identity(n, n));
}

Dictionary::Dictionary(int state_dim, std::vector<Fn> functions,
                       std::vector<std::string> labels)
    : state_dim_(state_dim), base_(std::move(functions)), labels_(std::move(labels)) {
  if (state_dim_ < 1) throw DomainError("state dimension must be at least 1");
  if (base_.empty()) throw DomainError("dictionary needs at least one function");
  const auto nd = static_cast<Eigen::Index>(base_.size());
  combine_ = Matrix::Identity(nd, nd);
  if (labels_.empty()) labels_ = generic_labels(nd);
  if (labels_.size() != base_.size())
    throw DomainError("label count does not match function count");
}

Dictionary Dictionary::monomials(int state_dim,
                                 const std::vector<std::vector<int>>& exponents) {
  if (exponents.empty())
    throw DomainError("monomial dictionary needs at least one exponent multi-index");
  std::vector<Fn> fns;
  std::vector<std::string> labels;
  fns.reserve(exponents.size());
  for (const auto& exps : exponents) {
    if (static_cast<int>(exps.size()) != state_dim)
      throw DomainError("exponent multi-index length does not match state dimension");
    for (int e : exps)
      if (e < 0) throw DomainError("monomial exponents must be nonnegative");
    labels.push_back(monomial_label(exps));
    fns.push_back([exps](const Vector& x) {
      double v = 1.0;
      for (Eigen::Index k = 0; k < x.size(); ++k)
        v *= int_pow(x(k), exps[static_cast<std::size_t>(k)]);
      return v;
    });
  }
  Dictionary d(state_dim, std::move(fns), std::move(labels));
  d.exponents_ = exponents;
  return d;
}

DataMatrix Dictionary::operator()(const Eigen::Ref<const Matrix>& states) const {
  if (states.cols() != state_dim_)
    throw DomainError("state matrix has " + std::to_string(states.cols()) +
                      " columns, dictionary expects " + std::to_string(state_dim_));
  const Eigen::Index n_rows = states.rows();
  const auto n_base = static_cast<Eigen::Index>(base_.size());
  Matrix base_vals(n_rows, n_base);
  Vector x(state_dim_);
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    x = states.row(i).transpose();
    for (Eigen::Index j = 0; j < n_base; ++j)
      base_vals(i, j) = base_[static_cast<std::size_t>(j)](x);
  }
  DataMatrix out = base_vals * combine_;
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      if (!std::isfinite(out(i, j)))
        throw NumericError("dictionary evaluation is not finite at row " +
                           std::to_string(i) + ", column " + std::to_string(j));
  return out;
}

Eigen::RowVectorXd Dictionary::row(const Vector& state) const {
  if (state.size() != state_dim_)
    throw DomainError("state has wrong dimension");
  Matrix one(1, state_dim_);
  one.row(0) = state.transpose();
  return (*this)(one).row(0);
}

Dictionary Dictionary::transformed(const BasisTransform& transform) const {
  if (transform.size() != size())
    throw DomainError("basis transform size " + std::to_string(transform.size()) +
                      " does not match dictionary size " + std::to_string(size()));
  Dictionary out;
  out.state_dim_ = state_dim_;
  out.base_ = base_;
  out.combine_ = combine_ * transform.matrix();
  out.exponents_ = exponents_;
  out.labels_ = is_identity(transform.matrix()) ? labels_ : generic_labels(size());
  return out;
}

Dictionary Dictionary::combined(const Eigen::Ref<const Matrix>& coefficients) const {
  if (coefficients.cols() != size())
    throw DomainError("combination matrix needs one column per dictionary function");
  if (coefficients.rows() < 1)
    throw DomainError("combination matrix needs at least one row");
  Dictionary out;
  out.state_dim_ = state_dim_;
  out.base_ = base_;
  out.combine_ = combine_ * coefficients.transpose();
  out.exponents_ = exponents_;
  out.labels_ = generic_labels(coefficients.rows());
  return out;
}

namespace {

Matrix parse_matrix(const nlohmann::json& arr, const std::string& key) {
  if (!arr.is_array() || arr.empty() || !arr.front().is_array())
    throw ParseError("dictionary field '" + key + "' must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(arr.size());
  const auto cols = static_cast<Eigen::Index>(arr.front().size());
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& r = arr[static_cast<std::size_t>(i)];
    if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != cols)
      throw ParseError("dictionary field '" + key + "' has ragged rows");
    for (Eigen::Index j = 0; j < cols; ++j) {
      const auto& v = r[static_cast<std::size_t>(j)];
      if (!v.is_number())
        throw ParseError("dictionary field '" + key + "' has a non-numeric entry");
      out(i, j) = v.get<double>();
    }
  }
  return out;
}

}  // namespace

Dictionary dictionary_from_json(const nlohmann::json& spec) {
  if (!spec.is_object()) throw ParseError("dictionary description must be a JSON object");
  if (!spec.contains("n") || !spec["n"].is_number_integer())
    throw ParseError("dictionary description needs an integer field 'n'");
  const int n = spec["n"].get<int>();
  if (n < 1) throw ParseError("dictionary field 'n' must be at least 1");
  if (!spec.contains("monomials") || !spec["monomials"].is_array() ||
      spec["monomials"].empty())
    throw ParseError("dictionary description needs a nonempty 'monomials' array");

  std::vector<std::vector<int>> exponents;
  for (const auto& entry : spec["monomials"]) {
    if (!entry.is_array())
      throw ParseError("each monomial must be an array of exponents");
    std::vector<int> exps;
    for (const auto& e : entry) {
      if (!e.is_number_integer())
        throw ParseError("monomial exponents must be integers");
      exps.push_back(e.get<int>());
    }
    if (static_cast<int>(exps.size()) != n)
      throw ParseError("each monomial needs exactly " + std::to_string(n) +
                       " exponents");
    exponents.push_back(std::move(exps));
  }

  Dictionary dict = Dictionary::monomials(n, exponents);
  if (spec.contains("combine"))
    dict = dict.combined(parse_matrix(spec["combine"], "combine"));
  if (spec.contains("transform")) {
    Matrix R = parse_matrix(spec["transform"], "transform");
    if (R.rows() != R.cols() || R.rows() != dict.size())
      throw ParseError("dictionary field 'transform' must be a square N_d x N_d array");
    dict = dict.transformed(BasisTransform(std::move(R)));
  }
  return dict;
}

Dictionary load_dictionary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dictionary file: " + path);
  nlohmann::json spec;
  try {
    in >> spec;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("invalid JSON in " + path + ": " + e.what());
  }
  return dictionary_from_json(spec);
}

}  // namespace koopman

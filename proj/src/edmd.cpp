#include "koopman/edmd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

namespace koopman {

namespace {

RankReport report_from_singular_values(const Vector& sv, Eigen::Index rows,
                                       Eigen::Index cols,
                                       std::optional<double> tolerance) {
  RankReport rep;
  rep.singular_values = sv;
  const double sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  rep.rank_tolerance =
      tolerance.value_or(static_cast<double>(std::max(rows, cols)) *
                         std::numeric_limits<double>::epsilon() * sigma_max);
  rep.numerical_rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rep.rank_tolerance) ++rep.numerical_rank;
  rep.full_column_rank = rep.numerical_rank == cols;
  return rep;
}

void require_same_shape(const Eigen::Ref<const DataMatrix>& A,
                        const Eigen::Ref<const DataMatrix>& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw DomainError("data matrices must have identical shape (got " +
                      std::to_string(A.rows()) + "x" + std::to_string(A.cols()) +
                      " and " + std::to_string(B.rows()) + "x" +
                      std::to_string(B.cols()) + ")");
}

// Solver with a report attached; threshold aligned with the rank rule so the
// SVD solve and the rank decision agree.
struct RankedSvd {
  Eigen::BDCSVD<Matrix> svd;
  RankReport report;

  RankedSvd(const Eigen::Ref<const DataMatrix>& A, std::optional<double> tolerance)
      : svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV) {
    report = report_from_singular_values(svd.singularValues(), A.rows(), A.cols(),
                                         tolerance);
    const double sigma_max = report.singular_values.size() ? report.singular_values(0) : 0.0;
    if (sigma_max > 0.0) svd.setThreshold(report.rank_tolerance / sigma_max);
  }
};

}  // namespace

RankReport check_full_rank(const Eigen::Ref<const DataMatrix>& M,
                           std::optional<double> tolerance) {
  Eigen::BDCSVD<Matrix> svd(M);
  return report_from_singular_values(svd.singularValues(), M.rows(), M.cols(),
                                     tolerance);
}

Matrix edmd_solve(const Eigen::Ref<const DataMatrix>& DX,
                  const Eigen::Ref<const DataMatrix>& DY,
                  std::optional<double> rank_tolerance) {
  require_same_shape(DX, DY);
  RankedSvd solver(DX, rank_tolerance);
  if (!solver.report.full_column_rank)
    throw AssumptionError("data matrix is column-rank deficient (rank " +
                          std::to_string(solver.report.numerical_rank) + " of " +
                          std::to_string(DX.cols()) + ")",
                          solver.report, "D(X)");
  return solver.svd.solve(DY);
}

EdmdModel fit_forward_backward(DataMatrix DX, DataMatrix DY,
                               std::optional<double> rank_tolerance) {
  require_same_shape(DX, DY);
  RankedSvd fwd(DX, rank_tolerance);
  RankedSvd bwd(DY, rank_tolerance);
  if (!fwd.report.full_column_rank)
    throw AssumptionError("D(X) is column-rank deficient (rank " +
                          std::to_string(fwd.report.numerical_rank) + " of " +
                          std::to_string(DX.cols()) + ")",
                          fwd.report, "D(X)");
  if (!bwd.report.full_column_rank)
    throw AssumptionError("D(Y) is column-rank deficient (rank " +
                          std::to_string(bwd.report.numerical_rank) + " of " +
                          std::to_string(DY.cols()) + ")",
                          bwd.report, "D(Y)");
  EdmdModel model;
  model.Kf = fwd.svd.solve(DY);
  model.Kb = bwd.svd.solve(DX);
  model.rank_x = std::move(fwd.report);
  model.rank_y = std::move(bwd.report);
  model.DX = std::move(DX);
  model.DY = std::move(DY);
  return model;
}

EdmdModel fit_forward_backward(const Dictionary& dict,
                               const Eigen::Ref<const Matrix>& X,
                               const Eigen::Ref<const Matrix>& Y,
                               std::optional<double> rank_tolerance) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols())
    throw DomainError("state matrices X and Y must have identical shape");
  EdmdModel model = fit_forward_backward(dict(X), dict(Y), rank_tolerance);
  model.dict = std::make_shared<const Dictionary>(dict);
  return model;
}

std::complex<double> Predictor::operator()(const Vector& state) const {
  if (!dict)
    throw DomainError("predictor has no dictionary attached; evaluate through "
                      "a model fitted from state data");
  Eigen::RowVectorXd d = dict->row(state);
  return {d.dot(coefficients.real()), d.dot(coefficients.imag())};
}

ComplexVector Predictor::evaluate(const Eigen::Ref<const Matrix>& states) const {
  if (!dict)
    throw DomainError("predictor has no dictionary attached; evaluate through "
                      "a model fitted from state data");
  DataMatrix D = (*dict)(states);
  ComplexVector out(states.rows());
  out.real() = D * coefficients.real();
  out.imag() = D * coefficients.imag();
  return out;
}

Predictor predict(const EdmdModel& model, const Eigen::Ref<const ComplexVector>& v) {
  if (v.size() != model.dictionary_size())
    throw DomainError("coefficient vector length " + std::to_string(v.size()) +
                      " does not match dictionary size " +
                      std::to_string(model.dictionary_size()));
  Predictor p;
  p.coefficients.resize(v.size());
  p.coefficients.real() = model.Kf * v.real();
  p.coefficients.imag() = model.Kf * v.imag();
  p.dict = model.dict;
  return p;
}

ResidualError residual_error(const EdmdModel& model) {
  ResidualError err;
  err.absolute = (model.DY - model.DX * model.Kf).norm();
  const double denom = model.DY.norm();
  if (denom == 0.0)
    throw DegenerateDataError("||D(Y)||_F is zero; relative residual undefined");
  err.relative = err.absolute / denom;
  return err;
}

Eigenpairs edmd_eigenpairs(const EdmdModel& model) {
  Eigen::EigenSolver<Matrix> es(model.Kf);
  if (es.info() != Eigen::Success)
    throw NumericError("eigendecomposition of the forward matrix failed");
  const Eigen::Index nd = model.Kf.rows();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(nd));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto& vals = es.eigenvalues();
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(vals(a)), mb = std::abs(vals(b));
    if (ma != mb) return ma > mb;
    if (vals(a).real() != vals(b).real()) return vals(a).real() > vals(b).real();
    return vals(a).imag() > vals(b).imag();
  });

  Eigenpairs out;
  out.eigenvalues.resize(nd);
  out.vectors.resize(nd, nd);
  for (Eigen::Index i = 0; i < nd; ++i) {
    out.eigenvalues(i) = vals(order[static_cast<std::size_t>(i)]);
    ComplexVector v = es.eigenvectors().col(order[static_cast<std::size_t>(i)]);
    // Fix the phase so the largest-magnitude entry is real positive.
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    const std::complex<double> pivot = v(imax);
    if (std::abs(pivot) > 0.0) v *= std::conj(pivot) / std::abs(pivot);
    out.vectors.col(i) = v;
  }

  Eigen::JacobiSVD<ComplexMatrix> svd(out.vectors);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  out.ill_conditioned = smin <= 0.0 || sv(0) / smin > 1e12;
  return out;
}

namespace {

nlohmann::json matrix_rows(const Matrix& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json rank_to_json(const RankReport& r) {
  nlohmann::json sv = nlohmann::json::array();
  for (Eigen::Index i = 0; i < r.singular_values.size(); ++i)
    sv.push_back(r.singular_values(i));
  return {{"numericalRank", r.numerical_rank},
          {"singularValues", std::move(sv)},
          {"tolerance", r.rank_tolerance},
          {"fullColumnRank", r.full_column_rank}};
}

Matrix matrix_from_rows(const nlohmann::json& rows, const std::string& key) {
  if (!rows.is_array() || rows.empty())
    throw ParseError("model field '" + key + "' must be a nonempty array of rows");
  const auto nr = static_cast<Eigen::Index>(rows.size());
  const auto nc = static_cast<Eigen::Index>(rows.front().size());
  Matrix M(nr, nc);
  for (Eigen::Index i = 0; i < nr; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != nc)
      throw ParseError("model field '" + key + "' has ragged rows");
    for (Eigen::Index j = 0; j < nc; ++j)
      M(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return M;
}

RankReport rank_from_json(const nlohmann::json& j) {
  RankReport r;
  r.numerical_rank = j.at("numericalRank").get<Eigen::Index>();
  const auto& sv = j.at("singularValues");
  r.singular_values.resize(static_cast<Eigen::Index>(sv.size()));
  for (Eigen::Index i = 0; i < r.singular_values.size(); ++i)
    r.singular_values(i) = sv[static_cast<std::size_t>(i)].get<double>();
  r.rank_tolerance = j.at("tolerance").get<double>();
  r.full_column_rank = j.at("fullColumnRank").get<bool>();
  return r;
}

}  // namespace

nlohmann::json to_json(const EdmdModel& model) {
  return {{"Kf", matrix_rows(model.Kf)},
          {"Kb", matrix_rows(model.Kb)},
          {"Nd", model.dictionary_size()},
          {"rank", {{"dx", rank_to_json(model.rank_x)},
                    {"dy", rank_to_json(model.rank_y)}}}};
}

EdmdModel model_from_json(const nlohmann::json& j) {
  EdmdModel model;
  model.Kf = matrix_from_rows(j.at("Kf"), "Kf");
  model.Kb = matrix_from_rows(j.at("Kb"), "Kb");
  const auto nd = j.at("Nd").get<Eigen::Index>();
  if (model.Kf.rows() != nd || model.Kf.cols() != nd || model.Kb.rows() != nd ||
      model.Kb.cols() != nd)
    throw ParseError("model matrices do not match the declared dictionary size");
  if (j.contains("rank")) {
    model.rank_x = rank_from_json(j["rank"].at("dx"));
    model.rank_y = rank_from_json(j["rank"].at("dy"));
  }
  return model;
}

}  // namespace koopman

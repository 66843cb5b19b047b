#include "koopman/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace koopman {

namespace {

struct ThinQr {
  Matrix Q;  // N x N_d, orthonormal columns
  Matrix R;  // N_d x N_d, upper triangular
};

ThinQr thin_qr(const Eigen::Ref<const DataMatrix>& A) {
  Eigen::HouseholderQR<Matrix> qr(A);
  ThinQr out;
  out.Q = qr.householderQ() * Matrix::Identity(A.rows(), A.cols());
  out.R = qr.matrixQR().topRows(A.cols()).triangularView<Eigen::Upper>();
  return out;
}

// Orthonormalized factors shared by the index, the spectrum, and the
// worst-case construction: G = Qx^T Qy and the SVD pieces derived from it.
struct GramFactors {
  Matrix gram;
  Vector cosines;      // singular values of G, descending
  Vector worst_right;  // right singular vector for the smallest cosine
  Matrix ry;           // R factor of DY
};

GramFactors gram_factors(const Eigen::Ref<const DataMatrix>& DX,
                         const Eigen::Ref<const DataMatrix>& DY) {
  const ThinQr qx = thin_qr(DX);
  ThinQr qy = thin_qr(DY);
  GramFactors f;
  f.gram = qx.Q.transpose() * qy.Q;
  Eigen::JacobiSVD<Matrix> svd(f.gram, Eigen::ComputeFullV);
  f.cosines = svd.singularValues();
  f.worst_right = svd.matrixV().col(f.cosines.size() - 1);
  f.ry = std::move(qy.R);
  return f;
}

double index_from_cosines(const Vector& cosines) {
  const double smin = cosines(cosines.size() - 1);
  return std::clamp(1.0 - smin * smin, 0.0, 1.0);
}

// Coefficients v* with DY v* = Qy c for the minimal right singular vector c,
// unit-normalized with a nonnegative leading entry.
Vector worst_coefficients(const GramFactors& f) {
  Vector v = f.ry.triangularView<Eigen::Upper>().solve(f.worst_right);
  v.normalize();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0.0) v = -v;
      break;
    }
  }
  return v;
}

void require_rank(const Eigen::Ref<const DataMatrix>& M, const char* name,
                  std::optional<double> tol) {
  RankReport rep = check_full_rank(M, tol);
  if (!rep.full_column_rank)
    throw AssumptionError(std::string(name) + " is column-rank deficient (rank " +
                          std::to_string(rep.numerical_rank) + " of " +
                          std::to_string(M.cols()) + ")",
                          std::move(rep), name);
}

void require_fitted_data(const EdmdModel& model) {
  if (model.DX.size() == 0 || model.DY.size() == 0)
    throw DomainError("model carries no data matrices (imported from JSON?); "
                      "consistency analysis needs D(X) and D(Y)");
}

double hausdorff_distance(const ComplexVector& a, const ComplexVector& b) {
  auto one_sided = [](const ComplexVector& p, const ComplexVector& q) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < q.size(); ++j)
        best = std::min(best, std::abs(p(i) - q(j)));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_sided(a, b), one_sided(b, a));
}

}  // namespace

Matrix consistency_matrix(const EdmdModel& model) {
  const Eigen::Index nd = model.dictionary_size();
  return Matrix::Identity(nd, nd) - model.Kf * model.Kb;
}

std::pair<double, PrincipalAngleData> consistency_index(
    const Eigen::Ref<const DataMatrix>& DX, const Eigen::Ref<const DataMatrix>& DY,
    std::optional<double> rank_tolerance) {
  if (DX.rows() != DY.rows() || DX.cols() != DY.cols())
    throw DomainError("data matrices must have identical shape");
  require_rank(DX, "D(X)", rank_tolerance);
  require_rank(DY, "D(Y)", rank_tolerance);

  GramFactors f = gram_factors(DX, DY);
  PrincipalAngleData angles;
  angles.gram = std::move(f.gram);
  angles.singular_values = std::move(f.cosines);
  return {index_from_cosines(angles.singular_values), std::move(angles)};
}

double projection_difference_sprad(const Eigen::Ref<const DataMatrix>& DX,
                                   const Eigen::Ref<const DataMatrix>& DY,
                                   Eigen::Index size_guard) {
  if (DX.rows() != DY.rows() || DX.cols() != DY.cols())
    throw DomainError("data matrices must have identical shape");
  if (DX.rows() > size_guard)
    throw SizeError("projection difference is " + std::to_string(DX.rows()) + "x" +
                    std::to_string(DX.rows()) + ", above the guard of " +
                    std::to_string(size_guard) +
                    "; use consistency_index (N_d x N_d) instead");
  require_rank(DX, "D(X)", std::nullopt);
  require_rank(DY, "D(Y)", std::nullopt);

  const Matrix qx = thin_qr(DX).Q;
  const Matrix qy = thin_qr(DY).Q;
  Matrix diff = qy * qy.transpose() - qx * qx.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(diff, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

double rrmse(const EdmdModel& model, const Eigen::Ref<const ComplexVector>& v) {
  require_fitted_data(model);
  if (v.size() != model.dictionary_size())
    throw DomainError("coefficient vector length does not match dictionary size");
  const Vector vr = v.real();
  const Vector vi = v.imag();
  const Vector dy_r = model.DY * vr;
  const Vector dy_i = model.DY * vi;
  const Vector res_r = dy_r - model.DX * (model.Kf * vr);
  const Vector res_i = dy_i - model.DX * (model.Kf * vi);
  const double numer = std::hypot(res_r.norm(), res_i.norm());
  const double denom = std::hypot(dy_r.norm(), dy_i.norm());
  const double floor = 1e-14 * model.DY.norm() * std::hypot(vr.norm(), vi.norm());
  if (denom <= floor)
    throw DegenerateFunctionError("D(Y) v is numerically zero; RRMSE undefined");
  return numer / denom;
}

double rrmse(const EdmdModel& model, const Eigen::Ref<const Vector>& v) {
  ComplexVector cv(v.size());
  cv.real() = v;
  cv.imag().setZero();
  return rrmse(model, cv);
}

WorstCase worst_case_function(const EdmdModel& model) {
  require_fitted_data(model);
  WorstCase wc;
  wc.coefficients = worst_coefficients(gram_factors(model.DX, model.DY));
  wc.rrmse = rrmse(model, wc.coefficients);
  return wc;
}

double sample_max_rrmse(const EdmdModel& model, int samples, std::uint64_t seed) {
  require_fitted_data(model);
  if (samples < 1) throw DomainError("sample count must be at least 1");
  const Matrix res = model.DY - model.DX * model.Kf;
  const Matrix A = res.transpose() * res;
  const Matrix B = model.DY.transpose() * model.DY;
  const Eigen::Index nd = model.dictionary_size();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector vr(nd), vi(nd);
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < nd; ++i) {
      vr(i) = gauss(rng);
      vi(i) = gauss(rng);
    }
    const double denom = vr.dot(B * vr) + vi.dot(B * vi);
    if (!(denom > 0.0)) continue;
    const double numer = vr.dot(A * vr) + vi.dot(A * vi);
    best = std::max(best, numer / denom);
  }
  return std::sqrt(std::max(best, 0.0));
}

ConsistencyReport analyze_consistency(const EdmdModel& model, ConsistencyPath path) {
  require_fitted_data(model);
  ConsistencyReport report;
  report.Mc = consistency_matrix(model);
  const Eigen::Index nd = model.dictionary_size();

  // Ranks were enforced when the model was fitted; the factors can be reused
  // for the spectrum and the worst-case certificate.
  GramFactors factors = gram_factors(model.DX, model.DY);

  if (path == ConsistencyPath::Orthonormalized) {
    // Spectrum of Mc equals that of I - G G^T, i.e. 1 - sigma_i(G)^2.
    report.eigenvalues.resize(nd);
    for (Eigen::Index i = 0; i < nd; ++i) {
      const double s = factors.cosines(nd - 1 - i);
      report.eigenvalues(i) = 1.0 - s * s;
    }
    report.Ic = index_from_cosines(factors.cosines);
    report.computation_path = "orthonormalized";
  } else {
    Eigen::EigenSolver<Matrix> es(report.Mc);
    if (es.info() != Eigen::Success)
      throw NumericError("eigendecomposition of the consistency matrix failed");
    Vector re = es.eigenvalues().real();
    std::sort(re.data(), re.data() + re.size(), std::greater<double>());
    report.eigenvalues = re;
    double sprad = 0.0;
    for (Eigen::Index i = 0; i < nd; ++i)
      sprad = std::max(sprad, std::abs(es.eigenvalues()(i)));
    report.Ic = std::clamp(sprad, 0.0, 1.0);
    report.computation_path = "direct";
  }

  report.sqrt_Ic = std::sqrt(report.Ic);
  report.worst_case_v = worst_coefficients(factors);
  report.worst_case_rrmse = rrmse(model, report.worst_case_v);
  return report;
}

BasisInvarianceReport verify_basis_invariance(const Dictionary& dict,
                                              const Eigen::Ref<const Matrix>& X,
                                              const Eigen::Ref<const Matrix>& Y,
                                              const BasisTransform& transform,
                                              double tolerance) {
  const EdmdModel base = fit_forward_backward(dict, X, Y);
  const EdmdModel changed = fit_forward_backward(dict.transformed(transform), X, Y);
  const Matrix mc = consistency_matrix(base);
  const Matrix mc_changed = consistency_matrix(changed);

  const Matrix& R = transform.matrix();
  const Matrix similar = R.partialPivLu().solve(mc * R);

  BasisInvarianceReport report;
  report.similarity_defect =
      (mc_changed - similar).norm() / std::max(1.0, mc.norm());

  Eigen::EigenSolver<Matrix> es_base(mc), es_changed(mc_changed);
  report.spectrum_distance =
      hausdorff_distance(es_base.eigenvalues(), es_changed.eigenvalues());
  report.pass = report.similarity_defect <= tolerance &&
                report.spectrum_distance <= tolerance;
  return report;
}

double empirical_l2_norm(const Eigen::Ref<const ComplexVector>& values) {
  if (values.size() == 0) throw DomainError("empirical L2 norm of empty sample set");
  return values.norm() / std::sqrt(static_cast<double>(values.size()));
}

double empirical_l2_norm(const Eigen::Ref<const Vector>& values) {
  if (values.size() == 0) throw DomainError("empirical L2 norm of empty sample set");
  return values.norm() / std::sqrt(static_cast<double>(values.size()));
}

nlohmann::json to_json(const ConsistencyReport& report) {
  nlohmann::json eigs = nlohmann::json::array();
  for (Eigen::Index i = 0; i < report.eigenvalues.size(); ++i)
    eigs.push_back(report.eigenvalues(i));
  nlohmann::json wc = nlohmann::json::array();
  for (Eigen::Index i = 0; i < report.worst_case_v.size(); ++i)
    wc.push_back(report.worst_case_v(i));
  return {{"Ic", report.Ic},
          {"sqrtIc", report.sqrt_Ic},
          {"eigenvalues", std::move(eigs)},
          {"worstCaseV", std::move(wc)},
          {"worstCaseRrmse", report.worst_case_rrmse},
          {"path", report.computation_path}};
}

}  // namespace koopman

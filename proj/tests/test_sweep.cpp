#include <doctest.h>

#include <cmath>

#include "koopman/consistency.hpp"
#include "koopman/dynamics.hpp"
#include "koopman/edmd.hpp"
#include "koopman/errors.hpp"
#include "koopman/sweep.hpp"
#include "support.hpp"

using namespace koopman;

namespace {

Dictionary cubic_pair() {
  Matrix C(2, 3);
  C << 1, 0, 0, 0, -1, 1;
  return Dictionary::monomials(1, {{1}, {2}, {3}}).combined(C);
}

}  // namespace

TEST_CASE("log grid hits both endpoints exactly") {
  auto g = log_spaced_grid(0.01, 100.0, 7);
  CHECK(g.front() == 0.01);
  CHECK(g.back() == 100.0);
  CHECK(g.size() == 7);
  for (std::size_t i = 0; i + 1 < g.size(); ++i) CHECK(g[i] < g[i + 1]);
  CHECK(log_spaced_grid(1.0, 1.0, 1).front() == 1.0);
  CHECK_THROWS_AS(log_spaced_grid(0.0, 1.0, 3), DomainError);
  CHECK_THROWS_AS(log_spaced_grid(1.0, 2.0, 0), DomainError);
}

TEST_CASE("residuals are basis-sensitive while the index is not") {
  SnapshotData data = example1_dataset(7);
  SweepResult sweep =
      run_alpha_sweep(cubic_pair(), data.X, data.Y, 0.01, 100.0, 40);

  double min_rel = 1e300, max_rel = 0.0, mean_sqrt = 0.0;
  for (std::size_t i = 0; i < sweep.alphas.size(); ++i) {
    REQUIRE(sweep.ok[i]);
    min_rel = std::min(min_rel, sweep.relative_residual[i]);
    max_rel = std::max(max_rel, sweep.relative_residual[i]);
    mean_sqrt += sweep.sqrt_consistency[i];
  }
  mean_sqrt /= static_cast<double>(sweep.alphas.size());

  CHECK(min_rel < 0.1 * max_rel);
  for (double s : sweep.sqrt_consistency) CHECK(std::abs(s - mean_sqrt) <= 1e-8);

  // The second family member approaches the invariant observable as alpha
  // shrinks, so the smallest alpha gives the smallest relative residual.
  CHECK(sweep.relative_residual.front() == min_rel);
}

TEST_CASE("spectra along the sweep agree as multisets") {
  SnapshotData data = example1_dataset(19);
  SweepResult sweep = run_alpha_sweep(cubic_pair(), data.X, data.Y, 0.01, 100.0, 9);
  auto reference = test_support::to_std(sweep.spectra.front());
  for (const auto& s : sweep.spectra)
    CHECK(test_support::multiset_match_distance(reference,
                                                test_support::to_std(s)) <= 1e-8);
}

TEST_CASE("a single-point sweep matches the direct analysis") {
  SnapshotData data = example1_dataset(23);
  SweepResult sweep = run_alpha_sweep(cubic_pair(), data.X, data.Y, 1.0, 1.0, 1);
  REQUIRE(sweep.alphas.size() == 1);

  Dictionary d1 = cubic_pair().transformed(BasisTransform(alpha_family_transform(1.0)));
  EdmdModel model = fit_forward_backward(d1, data.X, data.Y);
  ResidualError err = residual_error(model);
  ConsistencyReport report = analyze_consistency(model);

  CHECK(std::abs(sweep.residual[0] - err.absolute) <= 1e-10);
  CHECK(std::abs(sweep.relative_residual[0] - err.relative) <= 1e-10);
  CHECK(std::abs(sweep.sqrt_consistency[0] - report.sqrt_Ic) <= 1e-10);
}

TEST_CASE("sweep output is identical across thread counts") {
  SnapshotData data = example1_dataset(29);
  SweepResult serial =
      run_alpha_sweep(cubic_pair(), data.X, data.Y, 0.01, 100.0, 17, {}, 1);
  SweepResult parallel =
      run_alpha_sweep(cubic_pair(), data.X, data.Y, 0.01, 100.0, 17, {}, 4);
  for (std::size_t i = 0; i < serial.alphas.size(); ++i) {
    CHECK(serial.alphas[i] == parallel.alphas[i]);
    CHECK(serial.residual[i] == parallel.residual[i]);
    CHECK(serial.relative_residual[i] == parallel.relative_residual[i]);
    CHECK(serial.sqrt_consistency[i] == parallel.sqrt_consistency[i]);
  }
}

TEST_CASE("rank-deficient alphas are flagged and the sweep continues") {
  // d2 = d1 makes every family member [x, (1 + alpha) x], always rank 1.
  Matrix C(2, 1);
  C << 1, 1;
  Dictionary degenerate = Dictionary::monomials(1, {{1}}).combined(C);
  SnapshotData data = example1_dataset(31);
  SweepResult sweep =
      run_alpha_sweep(degenerate, data.X, data.Y, 0.01, 100.0, 5);
  for (std::size_t i = 0; i < sweep.alphas.size(); ++i) {
    CHECK_FALSE(sweep.ok[i]);
    CHECK(std::isnan(sweep.residual[i]));
    CHECK(std::isnan(sweep.sqrt_consistency[i]));
  }
}

TEST_CASE("the family needs exactly two functions") {
  SnapshotData data = example1_dataset(37);
  auto three = Dictionary::monomials(1, {{1}, {2}, {3}});
  CHECK_THROWS_AS(run_alpha_sweep(three, data.X, data.Y, 0.01, 1.0, 3), DomainError);
}

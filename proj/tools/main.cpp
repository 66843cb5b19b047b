// Command-line front end: snapshot generation, forward-backward model
// fitting, consistency analysis, the alpha sweep, and the worst-case
// certificate. Exit codes: 0 success, 1 data or assumption failure, 2 usage,
// 3 internal mathematical cross-check failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "koopman/consistency.hpp"
#include "koopman/dictionary.hpp"
#include "koopman/dynamics.hpp"
#include "koopman/edmd.hpp"
#include "koopman/errors.hpp"
#include "koopman/snapshot_io.hpp"
#include "koopman/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitData = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCrossCheck = 3;
constexpr double kCrossCheckTolerance = 1e-6;

struct Options {
  std::uint64_t seed = 0;
  std::string out;
  std::string format;
  double rank_tol = 0.0;
  bool rank_tol_set = false;

  std::optional<double> rank_tolerance() const {
    return rank_tol_set ? std::optional<double>(rank_tol) : std::nullopt;
  }
};

// The two-function base family used by `sweep` when no dictionary is given:
// [x, x^3 - x^2] over the monomials {x, x^2, x^3}.
koopman::Dictionary default_sweep_base() {
  koopman::Matrix C(2, 3);
  C << 1, 0, 0, 0, -1, 1;
  return koopman::Dictionary::monomials(1, {{1}, {2}, {3}}).combined(C);
}

void emit(const std::string& text, const std::string& out_path) {
  std::cout << text;
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw koopman::ParseError("cannot open output file: " + out_path);
    out << text;
  }
}

std::vector<double> parse_coeff_list(const std::string& text) {
  std::vector<double> coeffs;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (field.empty() || end != field.c_str() + field.size())
      throw koopman::ParseError("invalid coefficient '" + field + "' in --coeffs");
    coeffs.push_back(v);
  }
  if (coeffs.empty()) throw koopman::ParseError("--coeffs needs at least one value");
  return coeffs;
}

int sweep_thread_cap() {
  const char* env = std::getenv("KOOPMAN_THREADS");
  if (!env) return 0;
  const long v = std::strtol(env, nullptr, 10);
  return v > 0 ? static_cast<int>(v) : 0;
}

nlohmann::json vector_json(const koopman::Vector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

int cmd_simulate(const Options& opt, const std::string& system, int n_init,
                 int steps, const std::string& coeffs, double low, double high) {
  koopman::DynamicalSystem sys =
      system == "linear05" ? koopman::linear05()
                           : koopman::scalar_polynomial(parse_coeff_list(coeffs));
  koopman::Vector lo(1), hi(1);
  lo(0) = low;
  hi(0) = high;
  koopman::SnapshotData data = koopman::simulate_snapshots(
      sys, koopman::sample_uniform_initials(lo, hi, n_init, opt.seed), steps);
  data.seed = opt.seed;
  data.domain = "uniform[" + koopman::format_full(low) + "," +
                koopman::format_full(high) + "]";
  koopman::save_snapshots(data, opt.out);

  nlohmann::json summary = {{"N", data.size()},
                            {"n", data.state_dim()},
                            {"seed", data.seed},
                            {"system", data.system},
                            {"out", opt.out}};
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

int cmd_edmd(const Options& opt, const std::string& data_path,
             const std::string& dict_path) {
  koopman::SnapshotData data = koopman::load_snapshots(data_path);
  koopman::Dictionary dict = koopman::load_dictionary(dict_path);
  koopman::EdmdModel model =
      koopman::fit_forward_backward(dict, data.X, data.Y, opt.rank_tolerance());
  emit(koopman::to_json(model).dump(2) + "\n", opt.out);
  return kExitOk;
}

int cmd_consistency(const Options& opt, const std::string& data_path,
                    const std::string& dict_path, bool cross_check) {
  koopman::SnapshotData data = koopman::load_snapshots(data_path);
  koopman::Dictionary dict = koopman::load_dictionary(dict_path);
  koopman::EdmdModel model =
      koopman::fit_forward_backward(dict, data.X, data.Y, opt.rank_tolerance());

  koopman::ConsistencyReport report = koopman::analyze_consistency(model);
  koopman::ResidualError residual = koopman::residual_error(model);

  nlohmann::json out = koopman::to_json(report);
  out["E"] = residual.absolute;
  out["Erel"] = residual.relative;

  bool cross_check_failed = false;
  if (cross_check) {
    if (data.size() <= koopman::kProjectionSizeGuard) {
      const double sprad =
          koopman::projection_difference_sprad(model.DX, model.DY);
      const double delta = std::abs(sprad - report.sqrt_Ic);
      out["crossCheck"] = {{"projectionSprad", sprad}, {"delta", delta}};
      cross_check_failed = delta > kCrossCheckTolerance;
    } else {
      out["crossCheck"] = {{"skipped", "N above the projection size guard"}};
    }
  }

  emit(out.dump(2) + "\n", opt.out);
  if (cross_check_failed) {
    std::cerr << "error: projection-difference cross-check disagrees beyond "
              << kCrossCheckTolerance << "\n";
    return kExitCrossCheck;
  }
  return kExitOk;
}

int cmd_sweep(const Options& opt, const std::string& data_path,
              const std::string& dict_path, double alpha_min, double alpha_max,
              int alpha_count) {
  koopman::SnapshotData data = koopman::load_snapshots(data_path);
  koopman::Dictionary base =
      dict_path.empty() ? default_sweep_base() : koopman::load_dictionary(dict_path);
  koopman::SweepResult sweep =
      koopman::run_alpha_sweep(base, data.X, data.Y, alpha_min, alpha_max,
                               alpha_count, opt.rank_tolerance(), sweep_thread_cap());

  for (std::size_t i = 0; i < sweep.alphas.size(); ++i)
    if (!sweep.ok[i])
      std::cerr << "warning: alpha = " << koopman::format_full(sweep.alphas[i])
                << " violated the full-rank assumption; row flagged\n";

  std::string text;
  if (opt.format == "json") {
    nlohmann::json j = {{"alpha", sweep.alphas},
                        {"E", sweep.residual},
                        {"E_rel", sweep.relative_residual},
                        {"sqrt_Ic", sweep.sqrt_consistency}};
    nlohmann::json spectra = nlohmann::json::array();
    for (const auto& s : sweep.spectra) {
      nlohmann::json eigs = nlohmann::json::array();
      for (Eigen::Index k = 0; k < s.size(); ++k)
        eigs.push_back({{"re", s(k).real()}, {"im", s(k).imag()}});
      spectra.push_back(std::move(eigs));
    }
    j["spectra"] = std::move(spectra);
    text = j.dump(2) + "\n";
  } else {
    std::string csv = "alpha,E,E_rel,sqrt_Ic\n";
    for (std::size_t i = 0; i < sweep.alphas.size(); ++i) {
      csv += koopman::format_full(sweep.alphas[i]);
      csv += ",";
      csv += koopman::format_full(sweep.residual[i]);
      csv += ",";
      csv += koopman::format_full(sweep.relative_residual[i]);
      csv += ",";
      csv += koopman::format_full(sweep.sqrt_consistency[i]);
      csv += "\n";
    }
    text = std::move(csv);
  }
  emit(text, opt.out);
  return kExitOk;
}

int cmd_worst_case(const Options& opt, const std::string& data_path,
                   const std::string& dict_path, int samples) {
  koopman::SnapshotData data = koopman::load_snapshots(data_path);
  koopman::Dictionary dict = koopman::load_dictionary(dict_path);
  koopman::EdmdModel model =
      koopman::fit_forward_backward(dict, data.X, data.Y, opt.rank_tolerance());

  koopman::ConsistencyReport report = koopman::analyze_consistency(model);
  const double sampled = koopman::sample_max_rrmse(model, samples, opt.seed);

  nlohmann::json out = {{"worstCaseV", vector_json(report.worst_case_v)},
                        {"worstCaseRrmse", report.worst_case_rrmse},
                        {"sqrtIc", report.sqrt_Ic},
                        {"sampledMax", sampled},
                        {"samples", samples}};
  emit(out.dump(2) + "\n", opt.out);

  if (sampled > report.worst_case_rrmse + 1e-10) {
    std::cerr << "error: sampled maximum " << sampled
              << " exceeds the certified worst case " << report.worst_case_rrmse
              << "\n";
    return kExitCrossCheck;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extended dynamic mode decomposition with forward-backward "
               "consistency analysis"};
  app.require_subcommand(1);

  Options opt;
  app.add_option("--seed", opt.seed, "RNG seed (sampling, simulation)");
  app.add_option("--out", opt.out, "write output to this file");
  auto* format_opt = app.add_option("--format", opt.format, "output format")
                         ->check(CLI::IsMember({"csv", "json"}));
  auto* rank_tol_opt =
      app.add_option("--rank-tol", opt.rank_tol,
                     "absolute singular-value threshold for the rank checks "
                     "(default max(N, N_d) * eps * sigma_max)")
          ->check(CLI::PositiveNumber);

  auto* sim = app.add_subcommand(
      "simulate", "generate snapshot pairs from a built-in system, write CSV");
  std::string system = "linear05";
  int n_init = 500, steps = 2;
  std::string coeffs = "0,1,0,-0.5";
  double low = -2.0, high = 2.0;
  sim->fallthrough();
  sim->add_option("--system", system, "map to simulate")
      ->check(CLI::IsMember({"linear05", "custom-poly"}));
  sim->add_option("--n-init", n_init, "number of initial conditions")
      ->check(CLI::Range(1, 100000000));
  sim->add_option("--steps", steps, "steps per trajectory")
      ->check(CLI::Range(1, 100000000));
  sim->add_option("--coeffs", coeffs,
                  "polynomial coefficients c0,c1,... for custom-poly");
  sim->add_option("--low", low, "sampling box lower bound");
  sim->add_option("--high", high, "sampling box upper bound");

  std::string data_path, dict_path;

  auto* edmd = app.add_subcommand(
      "edmd", "fit the forward-backward model and print it as JSON");
  edmd->fallthrough();
  edmd->add_option("--data", data_path, "snapshot CSV")->required();
  edmd->add_option("--dict", dict_path, "dictionary JSON")->required();

  auto* cons =
      app.add_subcommand("consistency", "fit and print the consistency report");
  bool cross_check = false;
  cons->fallthrough();
  cons->add_option("--data", data_path, "snapshot CSV")->required();
  cons->add_option("--dict", dict_path, "dictionary JSON")->required();
  cons->add_flag("--cross-check", cross_check,
                 "also compute the N x N projection-difference spectral radius");

  auto* sweep = app.add_subcommand(
      "sweep", "sweep the two-function basis family, write alpha,E,E_rel,sqrt_Ic");
  double alpha_min = 0.01, alpha_max = 100.0;
  int alpha_count = 100;
  sweep->fallthrough();
  sweep->add_option("--data", data_path, "snapshot CSV")->required();
  sweep->add_option("--dict", dict_path,
                    "two-function base dictionary JSON (default [x, x^3 - x^2])");
  sweep->add_option("--alpha-min", alpha_min)->check(CLI::PositiveNumber);
  sweep->add_option("--alpha-max", alpha_max)->check(CLI::PositiveNumber);
  sweep->add_option("--alpha-count", alpha_count)->check(CLI::Range(1, 1000000));

  auto* worst = app.add_subcommand(
      "worst-case", "print the worst-case certificate and a sampled lower bound");
  int samples = 100000;
  worst->fallthrough();
  worst->add_option("--data", data_path, "snapshot CSV")->required();
  worst->add_option("--dict", dict_path, "dictionary JSON")->required();
  worst->add_option("--samples", samples, "random coefficient samples")
      ->check(CLI::Range(1, 1000000000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  opt.rank_tol_set = rank_tol_opt->count() > 0;
  if (format_opt->count() > 0 && opt.format == "csv" && !sweep->parsed()) {
    std::cerr << "error: --format csv is only available for 'sweep'\n";
    return kExitUsage;
  }
  if (sim->parsed() && opt.out.empty()) {
    std::cerr << "error: simulate requires --out\n";
    return kExitUsage;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(opt, system, n_init, steps, coeffs, low, high);
    if (edmd->parsed()) return cmd_edmd(opt, data_path, dict_path);
    if (cons->parsed())
      return cmd_consistency(opt, data_path, dict_path, cross_check);
    if (sweep->parsed())
      return cmd_sweep(opt, data_path, dict_path, alpha_min, alpha_max,
                       alpha_count);
    if (worst->parsed()) return cmd_worst_case(opt, data_path, dict_path, samples);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

// End-to-end tests of the command-line tool: exit codes, determinism, and
// coherence between subcommands. Each test shells out to the built binary.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

const fs::path& scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "koopman_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

CmdResult run_cli(const std::string& args) {
  const fs::path out = scratch_dir() / "stdout.txt";
  const fs::path err = scratch_dir() / "stderr.txt";
  const std::string cmd = std::string(KOOPMAN_CLI_PATH) + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int raw = std::system(cmd.c_str());
  CmdResult result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.out = slurp(out);
  result.err = slurp(err);
  return result;
}

fs::path write_file(const std::string& name, const std::string& content) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p) << content;
  return p;
}

const std::string kDictX = R"({"n":1,"monomials":[[1]]})";
const std::string kDictPair =
    R"({"n":1,"monomials":[[1],[2],[3]],"combine":[[1,0,0],[0,-1,1]]})";

fs::path example_data() {
  static const fs::path p = [] {
    const fs::path path = scratch_dir() / "example.csv";
    CmdResult r = run_cli("simulate --system linear05 --n-init 500 --steps 2 "
                          "--seed 7 --out " + path.string());
    REQUIRE(r.exit_code == 0);
    return path;
  }();
  return p;
}

}  // namespace

TEST_CASE("simulate writes the documented number of rows and a JSON summary") {
  const fs::path data = example_data();
  std::ifstream in(data);
  std::string line;
  int data_rows = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#' && line[0] != 'x') ++data_rows;
  CHECK(data_rows == 1000);

  CmdResult r = run_cli("simulate --system linear05 --n-init 2 --steps 1 --seed 1 "
                        "--out " + (scratch_dir() / "tiny.csv").string());
  CHECK(r.exit_code == 0);
  nlohmann::json summary = nlohmann::json::parse(r.out);
  CHECK(summary["N"] == 2);
  CHECK(summary["n"] == 1);
  CHECK(summary["seed"] == 1);
}

TEST_CASE("simulate is byte-deterministic for a fixed seed") {
  const fs::path a = scratch_dir() / "det_a.csv";
  const fs::path b = scratch_dir() / "det_b.csv";
  CHECK(run_cli("simulate --n-init 100 --steps 2 --seed 11 --out " + a.string())
            .exit_code == 0);
  CHECK(run_cli("simulate --n-init 100 --steps 2 --seed 11 --out " + b.string())
            .exit_code == 0);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("global flags work before or after the subcommand") {
  const fs::path a = scratch_dir() / "pos_a.csv";
  const fs::path b = scratch_dir() / "pos_b.csv";
  CHECK(run_cli("--seed 13 simulate --n-init 10 --steps 1 --out " + a.string())
            .exit_code == 0);
  CHECK(run_cli("simulate --n-init 10 --steps 1 --seed 13 --out " + b.string())
            .exit_code == 0);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("the custom polynomial system honors its coefficients") {
  const fs::path out = scratch_dir() / "poly.csv";
  CmdResult r = run_cli("simulate --system custom-poly --coeffs 0,1,0,-0.5 "
                        "--n-init 5 --steps 2 --seed 2 --out " + out.string());
  REQUIRE(r.exit_code == 0);
  std::ifstream in(out);
  std::string line;
  int checked = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
    double x, y;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf", &x, &y) == 2);
    CHECK(y == doctest::Approx(x - 0.5 * x * x * x).epsilon(1e-15));
    ++checked;
  }
  CHECK(checked == 10);
}

TEST_CASE("an oversized rank tolerance turns fits into rank failures") {
  const fs::path dict = write_file("dict_tol.json", kDictX);
  CHECK(run_cli("consistency --data " + example_data().string() + " --dict " +
                dict.string() + " --rank-tol 1e9").exit_code == 1);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_cli("simulate --steps 0 --out " +
                (scratch_dir() / "x.csv").string()).exit_code == 2);
  CHECK(run_cli("simulate --no-such-flag").exit_code == 2);
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("consistency --data missing.csv").exit_code == 2);  // --dict missing
  const fs::path dict = write_file("dict_fmt.json", kDictX);
  CHECK(run_cli("consistency --data " + example_data().string() + " --dict " +
                dict.string() + " --format csv").exit_code == 2);
  CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("missing or malformed data files exit with code 1") {
  const fs::path dict = write_file("dict_x.json", kDictX);
  CHECK(run_cli("consistency --data /nonexistent.csv --dict " + dict.string())
            .exit_code == 1);
  const fs::path bad = write_file("bad.csv", "x1,y1\n1,oops\n");
  CHECK(run_cli("consistency --data " + bad.string() + " --dict " + dict.string())
            .exit_code == 1);
}

TEST_CASE("rank failures exit with code 1 and name the deficient matrix") {
  const fs::path dup = write_file(
      "dict_dup.json", R"({"n":1,"monomials":[[1]],"combine":[[1],[1]]})");
  CmdResult r = run_cli("consistency --data " + example_data().string() +
                        " --dict " + dup.string());
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("D(X)") != std::string::npos);
}

TEST_CASE("consistency on the invariant dictionary reports a zero index") {
  const fs::path dict = write_file("dict_x2.json", kDictX);
  CmdResult r = run_cli("consistency --data " + example_data().string() +
                        " --dict " + dict.string());
  REQUIRE(r.exit_code == 0);
  nlohmann::json report = nlohmann::json::parse(r.out);
  CHECK(report["Ic"].get<double>() <= 1e-12);
  CHECK(report["E"].get<double>() <= 1e-10);
  CHECK(report["path"] == "orthonormalized");
}

TEST_CASE("the consistency index does not depend on the family member") {
  const fs::path base = write_file("dict_pair.json", kDictPair);
  CmdResult r_base = run_cli("consistency --data " + example_data().string() +
                             " --dict " + base.string());
  REQUIRE(r_base.exit_code == 0);
  const double ic = nlohmann::json::parse(r_base.out)["Ic"].get<double>();
  CHECK(ic > 0.0);
  CHECK(ic < 1.0);

  for (const char* alpha : {"0.01", "1", "100"}) {
    const std::string dict_alpha =
        std::string(R"({"n":1,"monomials":[[1],[2],[3]],)") +
        R"("combine":[[1,0,0],[0,-1,1]],"transform":[[1,1],[0,)" + alpha + "]]}";
    const fs::path p = write_file(std::string("dict_alpha_") + alpha + ".json",
                                  dict_alpha);
    CmdResult r = run_cli("consistency --data " + example_data().string() +
                          " --dict " + p.string());
    REQUIRE(r.exit_code == 0);
    CHECK(std::abs(nlohmann::json::parse(r.out)["Ic"].get<double>() - ic) <= 1e-8);
  }
}

TEST_CASE("cross-check agrees on a small subset and exits cleanly") {
  // Subset of 200 rows so the N x N path stays far below the guard.
  std::ifstream in(example_data());
  std::ostringstream subset;
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'x') {
      subset << line << "\n";
      continue;
    }
    if (rows < 200) {
      subset << line << "\n";
      ++rows;
    }
  }
  const fs::path small = write_file("subset200.csv", subset.str());
  const fs::path dict = write_file("dict_pair2.json", kDictPair);
  CmdResult r = run_cli("consistency --cross-check --data " + small.string() +
                        " --dict " + dict.string());
  REQUIRE(r.exit_code == 0);
  nlohmann::json report = nlohmann::json::parse(r.out);
  REQUIRE(report.contains("crossCheck"));
  CHECK(report["crossCheck"]["delta"].get<double>() <= 1e-9);
}

TEST_CASE("edmd prints the model schema") {
  const fs::path dict = write_file("dict_x3.json", kDictX);
  CmdResult r = run_cli("edmd --data " + example_data().string() + " --dict " +
                        dict.string());
  REQUIRE(r.exit_code == 0);
  nlohmann::json model = nlohmann::json::parse(r.out);
  CHECK(model["Nd"] == 1);
  CHECK(std::abs(model["Kf"][0][0].get<double>() - 0.5) <= 1e-12);
  CHECK(std::abs(model["Kb"][0][0].get<double>() - 2.0) <= 1e-12);
  CHECK(model["rank"]["dx"]["fullColumnRank"] == true);
}

TEST_CASE("a single-point sweep matches the consistency command") {
  CmdResult sweep = run_cli("sweep --data " + example_data().string() +
                            " --alpha-min 1 --alpha-max 1 --alpha-count 1");
  REQUIRE(sweep.exit_code == 0);
  std::istringstream csv(sweep.out);
  std::string header, row;
  std::getline(csv, header);
  CHECK(header == "alpha,E,E_rel,sqrt_Ic");
  std::getline(csv, row);
  double alpha, e, erel, sqrt_ic;
  REQUIRE(std::sscanf(row.c_str(), "%lf,%lf,%lf,%lf", &alpha, &e, &erel,
                      &sqrt_ic) == 4);

  const std::string d1 = R"({"n":1,"monomials":[[1],[2],[3]],)"
                         R"("combine":[[1,0,0],[0,-1,1]],"transform":[[1,1],[0,1]]})";
  const fs::path dict = write_file("dict_d1.json", d1);
  CmdResult cons = run_cli("consistency --data " + example_data().string() +
                           " --dict " + dict.string());
  REQUIRE(cons.exit_code == 0);
  nlohmann::json report = nlohmann::json::parse(cons.out);
  CHECK(std::abs(e - report["E"].get<double>()) <= 1e-10);
  CHECK(std::abs(erel - report["Erel"].get<double>()) <= 1e-10);
  CHECK(std::abs(sqrt_ic - report["sqrtIc"].get<double>()) <= 1e-10);
}

TEST_CASE("sweep output is deterministic and thread-count independent") {
  const std::string args = "sweep --data " + example_data().string() +
                           " --alpha-count 25";
  CmdResult a = run_cli(args);
  CmdResult b = run_cli(args);
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);

  ::setenv("KOOPMAN_THREADS", "1", 1);
  CmdResult serial = run_cli(args);
  ::setenv("KOOPMAN_THREADS", "3", 1);
  CmdResult threaded = run_cli(args);
  ::unsetenv("KOOPMAN_THREADS");
  CHECK(serial.out == threaded.out);
}

TEST_CASE("worst-case certifies the orthogonal-ranges toy instance") {
  const fs::path toy = write_file("toy.csv", "x1,y1\n1,0\n0,1\n");
  const fs::path dict = write_file("dict_x4.json", kDictX);
  CmdResult r = run_cli("worst-case --data " + toy.string() + " --dict " +
                        dict.string() + " --samples 1000");
  REQUIRE(r.exit_code == 0);
  nlohmann::json report = nlohmann::json::parse(r.out);
  CHECK(report["worstCaseRrmse"].get<double>() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(report["sqrtIc"].get<double>() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(report["sampledMax"].get<double>() <=
        report["worstCaseRrmse"].get<double>() + 1e-10);
}

TEST_CASE("worst-case certifies zero error on an invariant span") {
  const fs::path dict = write_file("dict_x6.json", kDictX);
  CmdResult r = run_cli("worst-case --data " + example_data().string() +
                        " --dict " + dict.string() + " --samples 1000");
  REQUIRE(r.exit_code == 0);
  nlohmann::json report = nlohmann::json::parse(r.out);
  CHECK(report["worstCaseRrmse"].get<double>() <= 1e-12);
  CHECK(report["sampledMax"].get<double>() <= 1e-10);
}

TEST_CASE("worst-case sampling stays below the certificate on smooth data") {
  const fs::path dict = write_file("dict_pair3.json", kDictPair);
  CmdResult r = run_cli("worst-case --data " + example_data().string() +
                        " --dict " + dict.string() + " --samples 100000 --seed 5");
  REQUIRE(r.exit_code == 0);
  nlohmann::json report = nlohmann::json::parse(r.out);
  const double certified = report["worstCaseRrmse"].get<double>();
  const double sampled = report["sampledMax"].get<double>();
  CHECK(std::abs(certified - report["sqrtIc"].get<double>()) <= 1e-8);
  CHECK(sampled <= certified + 1e-10);
  CHECK(sampled >= certified - 1e-3);
}

TEST_CASE("--out duplicates stdout into a file") {
  const fs::path dict = write_file("dict_x5.json", kDictX);
  const fs::path out = scratch_dir() / "report.json";
  CmdResult r = run_cli("consistency --data " + example_data().string() +
                        " --dict " + dict.string() + " --out " + out.string());
  REQUIRE(r.exit_code == 0);
  CHECK(slurp(out) == r.out);
}

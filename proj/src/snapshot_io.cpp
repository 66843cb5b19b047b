#include "koopman/snapshot_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "koopman/errors.hpp"

namespace koopman {

std::string format_full(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trimmed(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

void save_snapshots(const SnapshotData& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  const int n = data.state_dim();

  out << "# system: " << data.system << "\n";
  out << "# seed: " << data.seed << "\n";
  out << "# steps: " << data.steps << "\n";
  out << "# domain: " << data.domain << "\n";
  for (int k = 0; k < n; ++k) out << "x" << (k + 1) << ",";
  for (int k = 0; k < n; ++k) out << "y" << (k + 1) << (k + 1 < n ? "," : "");
  out << "\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (int k = 0; k < n; ++k) out << format_full(data.X(i, k)) << ",";
    for (int k = 0; k < n; ++k)
      out << format_full(data.Y(i, k)) << (k + 1 < n ? "," : "");
    out << "\n";
  }
  if (!out) throw ParseError("write failed: " + path);
}

SnapshotData load_snapshots(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);

  SnapshotData data;
  std::string line;
  std::size_t lineno = 0;
  int n = -1;
  std::vector<std::vector<double>> rows;

  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trimmed(line);
    if (body.empty()) continue;
    if (body[0] == '#') {
      const auto colon = body.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = trimmed(body.substr(1, colon - 1));
      const std::string value = trimmed(body.substr(colon + 1));
      if (key == "system") data.system = value;
      else if (key == "seed") data.seed = std::strtoull(value.c_str(), nullptr, 10);
      else if (key == "steps") data.steps = static_cast<int>(std::strtol(value.c_str(), nullptr, 10));
      else if (key == "domain") data.domain = value;
      continue;
    }
    const auto fields = split_csv(body);
    if (n < 0) {
      // Header row: x1..xn,y1..yn.
      if (fields.size() < 2 || fields.size() % 2 != 0)
        throw ParseError("header must list x1..xn,y1..yn with equal x and y "
                         "column counts", lineno);
      n = static_cast<int>(fields.size() / 2);
      for (int k = 0; k < n; ++k) {
        if (trimmed(fields[static_cast<std::size_t>(k)]) != "x" + std::to_string(k + 1) ||
            trimmed(fields[static_cast<std::size_t>(n + k)]) != "y" + std::to_string(k + 1))
          throw ParseError("header must list x1..xn,y1..yn with equal x and y "
                           "column counts", lineno);
      }
      continue;
    }
    if (fields.size() != static_cast<std::size_t>(2 * n))
      throw ParseError("expected " + std::to_string(2 * n) + " fields, got " +
                       std::to_string(fields.size()), lineno);
    std::vector<double> row(static_cast<std::size_t>(2 * n));
    for (std::size_t k = 0; k < row.size(); ++k) {
      const std::string f = trimmed(fields[k]);
      if (f.empty()) throw ParseError("empty numeric field", lineno);
      errno = 0;
      char* end = nullptr;
      row[k] = std::strtod(f.c_str(), &end);
      if (end != f.c_str() + f.size() || errno == ERANGE)
        throw ParseError("non-numeric field '" + f + "'", lineno);
    }
    rows.push_back(std::move(row));
  }

  if (n < 0) throw ParseError("no data rows in " + path);
  if (rows.empty()) throw ParseError("no data rows in " + path);

  data.X.resize(static_cast<Eigen::Index>(rows.size()), n);
  data.Y.resize(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int k = 0; k < n; ++k) {
      data.X(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
      data.Y(static_cast<Eigen::Index>(i), k) =
          rows[i][static_cast<std::size_t>(n + k)];
    }
  return data;
}

}  // namespace koopman

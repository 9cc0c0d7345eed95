#include "balcl/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "balcl/errors.hpp"

namespace balcl {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // Trim to the shortest representation that round-trips.
  for (int prec = 1; prec <= 16; ++prec) {
    char shorter[40];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    require(pos == s.size(), "csv: trailing characters in numeric cell at " + where);
    return v;
  } catch (const InvalidArgument&) {
    throw;
  } catch (const std::exception&) {
    throw InvalidArgument("csv: cannot parse number '" + s + "' at " + where);
  }
}

std::vector<std::string> read_nonempty_lines(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string objective_name(Objective obj) {
  switch (obj) {
    case Objective::KMedian: return "kmedian";
    case Objective::KMeans: return "kmeans";
    case Objective::KCenter: return "kcenter";
  }
  return "kmedian";
}

Objective parse_objective(const std::string& name) {
  if (name == "kmedian") return Objective::KMedian;
  if (name == "kmeans") return Objective::KMeans;
  if (name == "kcenter") return Objective::KCenter;
  throw InvalidArgument("unknown objective '" + name + "' (expected kmedian|kmeans|kcenter)");
}

Instance read_points_csv(const std::string& path) {
  auto lines = read_nonempty_lines(path);
  require(lines.size() >= 2, "points csv: need a header and at least one row: " + path);
  auto header = split_csv_line(lines[0]);
  bool has_label = !header.empty() && header.back() == "label";
  int dim = static_cast<int>(header.size()) - (has_label ? 1 : 0);
  require(dim >= 1, "points csv: no feature columns in " + path);
  for (int t = 0; t < dim; ++t)
    require(header[t] == "f" + std::to_string(t), "points csv: header column " + std::to_string(t) +
                                                      " should be f" + std::to_string(t));

  int n = static_cast<int>(lines.size()) - 1;
  std::vector<double> pts(static_cast<std::size_t>(n) * dim);
  std::vector<int> labels;
  if (has_label) labels.resize(n);
  for (int r = 0; r < n; ++r) {
    auto cells = split_csv_line(lines[r + 1]);
    require(static_cast<int>(cells.size()) == dim + (has_label ? 1 : 0),
            "points csv: row " + std::to_string(r + 1) + " has wrong column count");
    std::string where = "row " + std::to_string(r + 1);
    for (int t = 0; t < dim; ++t)
      pts[static_cast<std::size_t>(r) * dim + t] = parse_double(cells[t], where);
    if (has_label) labels[r] = static_cast<int>(parse_double(cells[dim], where));
  }
  return Instance::from_points(std::move(pts), dim, std::move(labels));
}

void write_points_csv(const std::string& path, const Instance& inst) {
  require(inst.has_points(), "write_points_csv: instance has no coordinates");
  std::ofstream out(path);
  require(out.good(), "cannot write file: " + path);
  for (int t = 0; t < inst.dim; ++t) out << (t ? ",f" : "f") << t;
  if (inst.has_labels()) out << ",label";
  out << "\n";
  for (int i = 0; i < inst.n; ++i) {
    const double* p = inst.point(i);
    for (int t = 0; t < inst.dim; ++t) {
      if (t) out << ',';
      out << format_double(p[t]);
    }
    if (inst.has_labels()) out << ',' << inst.labels[i];
    out << "\n";
  }
  require(out.good(), "write failed: " + path);
}

Instance read_matrix_csv(const std::string& path) {
  auto lines = read_nonempty_lines(path);
  int n = static_cast<int>(lines.size());
  std::vector<double> d(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r) {
    auto cells = split_csv_line(lines[r]);
    require(static_cast<int>(cells.size()) == n,
            "matrix csv: row " + std::to_string(r) + " has " + std::to_string(cells.size()) +
                " columns, expected " + std::to_string(n));
    for (int c = 0; c < n; ++c)
      d[static_cast<std::size_t>(r) * n + c] = parse_double(cells[c], "row " + std::to_string(r));
  }
  return Instance::from_matrix(std::move(d), n);
}

void write_matrix_csv(const std::string& path, const Instance& inst) {
  std::ofstream out(path);
  require(out.good(), "cannot write file: " + path);
  for (int i = 0; i < inst.n; ++i) {
    for (int j = 0; j < inst.n; ++j) {
      if (j) out << ',';
      out << format_double(inst.distance(i, j));
    }
    out << "\n";
  }
  require(out.good(), "write failed: " + path);
}

Instance read_instance_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open file: " + path);
  std::string first;
  std::getline(in, first);
  in.close();
  if (!first.empty() && first[0] == 'f') return read_points_csv(path);
  return read_matrix_csv(path);
}

nlohmann::json assignment_to_json(const Assignment& a, Objective obj, double value,
                                  const ViolationReport& report) {
  nlohmann::json j;
  j["centers"] = a.centers;
  nlohmann::json assign = nlohmann::json::array();
  for (const auto& slots : a.assign) {
    nlohmann::json row = nlohmann::json::array();
    for (auto& [c, m] : slots) row.push_back({{"c", c}, {"m", m}});
    assign.push_back(std::move(row));
  }
  j["assign"] = std::move(assign);
  j["objective"] = objective_name(obj);
  j["value"] = value;
  j["violations"] = {{"loads", report.loads},
                     {"counts", report.counts},
                     {"max_upper_factor", report.max_upper_factor},
                     {"max_lower_factor", report.max_lower_factor},
                     {"worst_multiplicity", report.worst_multiplicity},
                     {"feasible", report.feasible()}};
  return j;
}

Assignment assignment_from_json(const nlohmann::json& j) {
  Assignment a;
  a.centers = j.at("centers").get<std::vector<int>>();
  for (const auto& row : j.at("assign")) {
    std::vector<std::pair<int, int>> slots;
    for (const auto& e : row) slots.push_back({e.at("c").get<int>(), e.at("m").get<int>()});
    a.assign.push_back(std::move(slots));
  }
  return a;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  require(out.good(), "cannot write file: " + path);
  out << j.dump(2) << "\n";
  require(out.good(), "write failed: " + path);
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InvalidArgument("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

}  // namespace balcl

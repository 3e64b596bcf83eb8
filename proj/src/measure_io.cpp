#include "meanfield/measure_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace meanfield {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

EmpiricalMeasure read_cloud_csv(std::istream& in) {
  std::vector<Vector> rows;
  std::string line;
  Eigen::Index d = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<double> vals;
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &pos);
      } catch (const std::exception&) {
        throw std::invalid_argument("cloud CSV: cannot parse '" + cell + "'");
      }
      vals.push_back(v);
    }
    if (vals.empty()) throw std::invalid_argument("cloud CSV: empty row");
    if (d < 0) d = static_cast<Eigen::Index>(vals.size());
    if (static_cast<Eigen::Index>(vals.size()) != d) {
      throw std::invalid_argument("cloud CSV: inconsistent row dimensions");
    }
    rows.push_back(Eigen::Map<Vector>(vals.data(), d));
  }
  return EmpiricalMeasure::from_points(rows);
}

EmpiricalMeasure read_cloud_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open cloud file: " + path);
  return read_cloud_csv(in);
}

void write_cloud_csv(std::ostream& out, const EmpiricalMeasure& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    for (Eigen::Index j = 0; j < m.dimension(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m.points()(i, j));
    }
    out << '\n';
  }
}

void write_cloud_csv_file(const std::string& path, const EmpiricalMeasure& m) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write cloud file: " + path);
  write_cloud_csv(out, m);
}

EmpiricalMeasure read_cloud_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("cloud JSON: ") + e.what());
  }
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument("cloud JSON: expected a non-empty array of arrays");
  }
  std::vector<Vector> rows;
  for (const auto& row : j) {
    if (!row.is_array() || row.empty()) {
      throw std::invalid_argument("cloud JSON: expected a non-empty array of arrays");
    }
    Vector v(static_cast<Eigen::Index>(row.size()));
    Eigen::Index k = 0;
    for (const auto& cell : row) {
      if (!cell.is_number()) {
        throw std::invalid_argument("cloud JSON: non-numeric coordinate");
      }
      v[k++] = cell.get<double>();
    }
    rows.push_back(std::move(v));
  }
  return EmpiricalMeasure::from_points(rows);
}

void write_cloud_json(std::ostream& out, const EmpiricalMeasure& m) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < m.dimension(); ++k) row.push_back(m.points()(i, k));
    j.push_back(std::move(row));
  }
  out << j.dump();
}

}  // namespace meanfield

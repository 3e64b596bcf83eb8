#pragma once

#include <iosfwd>
#include <string>

#include "meanfield/measures.hpp"

namespace meanfield {

/// CSV cloud format: one particle per row, d comma-separated columns, no
/// header. Readers validate finiteness and dimension consistency.
EmpiricalMeasure read_cloud_csv(std::istream& in);
EmpiricalMeasure read_cloud_csv_file(const std::string& path);
void write_cloud_csv(std::ostream& out, const EmpiricalMeasure& m);
void write_cloud_csv_file(const std::string& path, const EmpiricalMeasure& m);

/// JSON cloud format: array of arrays, [[x_1,...,x_d], ...].
EmpiricalMeasure read_cloud_json(std::istream& in);
void write_cloud_json(std::ostream& out, const EmpiricalMeasure& m);

/// Prints a double with 17 significant digits (round-trip exact).
std::string format_double(double v);

}  // namespace meanfield

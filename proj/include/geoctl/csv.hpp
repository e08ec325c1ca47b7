#pragma once

// Trajectory CSV files: header t,q1..qn,qd1..qdn,u1..um,E,E_Lf,phi, decimal
// rendering with 17 significant digits, LF line ends.

#include "geoctl/dynamics.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace geoctl {

/// Shortest round-trip safe rendering is not used on purpose: every value is
/// written with exactly 17 significant digits so files compare byte for byte.
std::string format_double(double v);
/// Strict parse of a whole field. InvalidArgument on malformed input.
double parse_double(const std::string &field);

std::vector<std::string> trajectory_header(int n, int m);
void write_trajectory_csv(std::ostream &os, const Trajectory &tr);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

CsvTable read_csv(std::istream &is);
/// Rebuilds the per-sample data of a trajectory file (metadata is not stored in the CSV).
Trajectory trajectory_from_csv(const CsvTable &table, int n, int m);

/// A standalone matplotlib script that plots the columns of `csv_name`.
std::string plot_script(const std::string &csv_name, int n, int m, const std::string &title);

} // namespace geoctl

#pragma once

#include <map>
#include <string>
#include <vector>

#include "stapwave/driver.hpp"

namespace stapwave::io {

/// Numeric table with string metadata; the single export vehicle for traces
/// and curves. Floats are written as %.17g, so write→read→write is
/// byte-stable and loss-free.
struct Table {
  std::map<std::string, std::string> header;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::string format_double(double value);

void write_csv(const Table& table, const std::string& path);
void write_json(const Table& table, const std::string& path);
Table read_csv(const std::string& path);
Table read_json(const std::string& path);

/// Trace rows are (k, objective, objective_half, constraint_residual, power,
/// modulus_spread, wall_ms), ordered by k.
Table trace_table(const driver::RunTrace& trace, const std::string& algorithm,
                  const std::string& scenario_hash, const std::string& config_echo);

void write_table(const Table& table, const std::string& path, const std::string& format);

}  // namespace stapwave::io

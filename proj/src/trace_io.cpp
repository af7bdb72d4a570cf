#include "stapwave/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace stapwave::io {

using nlohmann::json;

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_csv(const Table& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ModelError("export: cannot open '" + path + "' for writing");
  for (const auto& [key, value] : table.header) out << "# " << key << "=" << value << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    out << table.columns[i] << (i + 1 < table.columns.size() ? "," : "");
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << format_double(row[i]) << (i + 1 < row.size() ? "," : "");
    out << "\n";
  }
}

void write_json(const Table& table, const std::string& path) {
  json doc;
  doc["header"] = table.header;
  doc["columns"] = table.columns;
  doc["rows"] = table.rows;
  std::ofstream out(path);
  if (!out) throw ModelError("export: cannot open '" + path + "' for writing");
  out << doc.dump(2) << "\n";
}

Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("export: cannot open '" + path + "'");
  Table table;
  std::string line;
  bool have_columns = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      auto eq = line.find('=');
      if (eq != std::string::npos)
        table.header[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    if (!have_columns) {
      while (std::getline(ss, cell, ',')) table.columns.push_back(cell);
      have_columns = true;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    table.rows.push_back(std::move(row));
  }
  return table;
}

Table read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("export: cannot open '" + path + "'");
  json doc = json::parse(in);
  Table table;
  table.header = doc.at("header").get<std::map<std::string, std::string>>();
  table.columns = doc.at("columns").get<std::vector<std::string>>();
  table.rows = doc.at("rows").get<std::vector<std::vector<double>>>();
  return table;
}

Table trace_table(const driver::RunTrace& trace, const std::string& algorithm,
                  const std::string& scenario_hash, const std::string& config_echo) {
  Table table;
  table.header["scenario_hash"] = scenario_hash;
  table.header["seed"] = std::to_string(trace.seed);
  table.header["algorithm"] = algorithm;
  table.header["termination"] = driver::to_string(trace.termination);
  if (!trace.termination_detail.empty()) table.header["detail"] = trace.termination_detail;
  table.header["config"] = config_echo;
  table.columns = {"k",     "objective",      "objective_half", "constraint_residual",
                   "power", "modulus_spread", "wall_ms"};
  for (const auto& state : trace.states)
    table.rows.push_back({static_cast<double>(state.k), state.objective, state.objective_half,
                          state.constraint_residual, state.power, state.modulus_spread,
                          state.wall_ms});
  return table;
}

void write_table(const Table& table, const std::string& path, const std::string& format) {
  if (format == "csv")
    write_csv(table, path);
  else if (format == "json")
    write_json(table, path);
  else
    throw ModelError("export: unknown format '" + format + "'");
}

}  // namespace stapwave::io

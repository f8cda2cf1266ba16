#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tubal/config.hpp"
#include "tubal/solver.hpp"

namespace tubal::io {

/// Provenance comment block: one "# key=value" line per config field.
std::string provenance_block(const RunConfig& c);

/// Column names of a trace CSV for tube length k (sigma columns are
/// per-slice).
std::vector<std::string> trace_columns(int k);

/// Full CSV text: provenance block, header row, one row per metrics entry.
/// Floats carry 17 significant digits; missing optionals become empty cells.
std::string trace_csv_string(const RunConfig& c,
                             const std::vector<solver::IterateMetrics>& rows);

void write_trace_csv(const std::string& path, const RunConfig& c,
                     const std::vector<solver::IterateMetrics>& rows);

/// Generic table with the same provenance header (used by sweeps and the
/// alignment trace). Cells are written as-is; use format_double for numbers.
std::string table_csv_string(const RunConfig& c, const std::vector<std::string>& columns,
                             const std::vector<std::vector<std::string>>& rows);

void write_table_csv(const std::string& path, const RunConfig& c,
                     const std::vector<std::string>& columns,
                     const std::vector<std::vector<std::string>>& rows);

/// Parsed CSV: provenance pairs, column names, and string cells.
struct CsvData {
    std::vector<std::pair<std::string, std::string>> provenance;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 if absent
    std::optional<double> value(size_t row, const std::string& name) const;
};

CsvData read_csv(const std::string& path);
CsvData parse_csv(const std::string& text);

/// RFC-4180 escaping for one cell.
std::string csv_escape(const std::string& cell);

}  // namespace tubal::io

#include "tubal/trace.hpp"

#include <fstream>
#include <sstream>

namespace tubal::io {

std::string csv_escape(const std::string& cell) {
    if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (char ch : cell) {
        if (ch == '"') out += "\"\"";
        else out += ch;
    }
    out += "\"";
    return out;
}

std::string provenance_block(const RunConfig& c) {
    std::string out;
    for (const auto& [key, value] : c.to_pairs()) {
        out += "# " + key + "=" + value + "\n";
    }
    return out;
}

std::vector<std::string> trace_columns(int k) {
    std::vector<std::string> cols = {"t",           "loss",        "test_err",
                                     "sig_tube_err", "u_spec_norm", "angle_L_Lt",
                                     "angle_X_Lt",   "angle_X_UW",  "noise_spec_norm",
                                     "decomp_resid"};
    for (int j = 1; j <= k; ++j) cols.push_back("sigma_r_s" + std::to_string(j));
    for (int j = 1; j <= k; ++j) cols.push_back("sigma_r1_s" + std::to_string(j));
    cols.push_back("power_gap");
    return cols;
}

namespace {

std::string cell(double v) { return format_double(v); }
std::string cell(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

void append_row(std::string& out, const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += csv_escape(cells[i]);
    }
    out += '\n';
}

}  // namespace

std::string trace_csv_string(const RunConfig& c,
                             const std::vector<solver::IterateMetrics>& rows) {
    std::string out = provenance_block(c);
    const std::vector<std::string> cols = trace_columns(c.k);
    append_row(out, cols);
    for (const auto& m : rows) {
        std::vector<std::string> cells;
        cells.reserve(cols.size());
        cells.push_back(std::to_string(m.t));
        cells.push_back(cell(m.loss));
        cells.push_back(cell(m.test_err));
        cells.push_back(cell(m.sig_tube_err));
        cells.push_back(cell(m.u_spec_norm));
        cells.push_back(cell(m.angle_L_Lt));
        cells.push_back(cell(m.angle_X_Lt));
        cells.push_back(cell(m.angle_X_UW));
        cells.push_back(cell(m.noise_spec_norm));
        cells.push_back(cell(m.decomp_resid));
        for (int j = 0; j < c.k; ++j) {
            cells.push_back(j < static_cast<int>(m.sigma_r_slices.size())
                                ? cell(m.sigma_r_slices[static_cast<size_t>(j)])
                                : std::string());
        }
        for (int j = 0; j < c.k; ++j) {
            cells.push_back(j < static_cast<int>(m.sigma_r1_slices.size())
                                ? cell(m.sigma_r1_slices[static_cast<size_t>(j)])
                                : std::string());
        }
        cells.push_back(cell(m.power_gap));
        append_row(out, cells);
    }
    return out;
}

void write_trace_csv(const std::string& path, const RunConfig& c,
                     const std::vector<solver::IterateMetrics>& rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out << trace_csv_string(c, rows);
    if (!out) throw FormatError("write failed for '" + path + "'");
}

std::string table_csv_string(const RunConfig& c, const std::vector<std::string>& columns,
                             const std::vector<std::vector<std::string>>& rows) {
    std::string out = provenance_block(c);
    append_row(out, columns);
    for (const auto& r : rows) append_row(out, r);
    return out;
}

void write_table_csv(const std::string& path, const RunConfig& c,
                     const std::vector<std::string>& columns,
                     const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out << table_csv_string(c, columns, rows);
    if (!out) throw FormatError("write failed for '" + path + "'");
}

int CsvData::column(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return static_cast<int>(i);
    }
    return -1;
}

std::optional<double> CsvData::value(size_t row, const std::string& name) const {
    const int c = column(name);
    if (c < 0 || row >= rows.size()) return std::nullopt;
    const std::string& cell = rows[row][static_cast<size_t>(c)];
    if (cell.empty()) return std::nullopt;
    return std::stod(cell);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    cells.push_back(cur);
    return cells;
}

}  // namespace

CsvData parse_csv(const std::string& text) {
    CsvData d;
    std::istringstream in(text);
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            if (!body.empty() && body[0] == ' ') body = body.substr(1);
            const size_t eq = body.find('=');
            if (eq != std::string::npos) {
                d.provenance.emplace_back(body.substr(0, eq), body.substr(eq + 1));
            }
            continue;
        }
        if (!header_seen) {
            d.columns = split_csv_line(line);
            header_seen = true;
        } else {
            d.rows.push_back(split_csv_line(line));
        }
    }
    if (!header_seen) throw FormatError("CSV has no header row");
    return d;
}

CsvData read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

}  // namespace tubal::io

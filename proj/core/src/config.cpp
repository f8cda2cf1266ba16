#include "tubal/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace tubal::io {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

long parse_long(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        long r = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw ValidationError("field '" + key + "': not an integer: '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        unsigned long long r = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return static_cast<std::uint64_t>(r);
    } catch (const std::exception&) {
        throw ValidationError("field '" + key + "': not an unsigned integer: '" + v + "'");
    }
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double r = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const std::exception&) {
        throw ValidationError("field '" + key + "': not a number: '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ValidationError("field '" + key + "': not a boolean: '" + v + "'");
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<int> RunConfig::rank_grid_values() const {
    std::vector<int> out;
    std::stringstream ss(rank_grid);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(static_cast<int>(parse_long("rank_grid", item)));
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> RunConfig::to_pairs() const {
    std::vector<std::pair<std::string, std::string>> p;
    p.emplace_back("n", std::to_string(n));
    p.emplace_back("k", std::to_string(k));
    p.emplace_back("r", std::to_string(r));
    p.emplace_back("R", std::to_string(R));
    p.emplace_back("m", std::to_string(m));
    p.emplace_back("mu", format_double(mu));
    p.emplace_back("alpha", format_double(alpha));
    p.emplace_back("iters", std::to_string(iters));
    p.emplace_back("stride", std::to_string(stride));
    p.emplace_back("seed", std::to_string(seed));
    p.emplace_back("normalization", solver::to_string(normalization));
    p.emplace_back("out_dir", out_dir);
    p.emplace_back("tau", format_double(tau));
    p.emplace_back("alpha_grid_max", format_double(alpha_grid_max));
    p.emplace_back("alpha_grid_min", format_double(alpha_grid_min));
    p.emplace_back("alpha_grid_points", std::to_string(alpha_grid_points));
    p.emplace_back("alpha_sweep_seeds", std::to_string(alpha_sweep_seeds));
    p.emplace_back("alpha_sweep_mu", format_double(alpha_sweep_mu));
    p.emplace_back("rank_grid", rank_grid);
    p.emplace_back("rank_sweep_seeds", std::to_string(rank_sweep_seeds));
    p.emplace_back("alignment_window", std::to_string(alignment_window));
    p.emplace_back("alignment_band", format_double(alignment_band));
    p.emplace_back("knee_window", std::to_string(knee_window));
    p.emplace_back("knee_consecutive", std::to_string(knee_consecutive));
    p.emplace_back("track_power", track_power ? "1" : "0");
    p.emplace_back("record_spectra", record_spectra ? "1" : "0");
    p.emplace_back("rip_rank", std::to_string(rip_rank));
    p.emplace_back("rip_trials", std::to_string(rip_trials));
    p.emplace_back("stat_trials", std::to_string(stat_trials));
    return p;
}

namespace {

void apply_field(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "n") c.n = static_cast<int>(parse_long(key, value));
    else if (key == "k") c.k = static_cast<int>(parse_long(key, value));
    else if (key == "r") c.r = static_cast<int>(parse_long(key, value));
    else if (key == "R") c.R = static_cast<int>(parse_long(key, value));
    else if (key == "m") c.m = static_cast<int>(parse_long(key, value));
    else if (key == "mu") c.mu = parse_double(key, value);
    else if (key == "alpha") c.alpha = parse_double(key, value);
    else if (key == "iters") c.iters = parse_long(key, value);
    else if (key == "stride") c.stride = static_cast<int>(parse_long(key, value));
    else if (key == "seed") c.seed = parse_u64(key, value);
    else if (key == "normalization") c.normalization = solver::normalization_from_string(value);
    else if (key == "out_dir") c.out_dir = value;
    else if (key == "tau") c.tau = parse_double(key, value);
    else if (key == "alpha_grid_max") c.alpha_grid_max = parse_double(key, value);
    else if (key == "alpha_grid_min") c.alpha_grid_min = parse_double(key, value);
    else if (key == "alpha_grid_points") c.alpha_grid_points = static_cast<int>(parse_long(key, value));
    else if (key == "alpha_sweep_seeds") c.alpha_sweep_seeds = static_cast<int>(parse_long(key, value));
    else if (key == "alpha_sweep_mu") c.alpha_sweep_mu = parse_double(key, value);
    else if (key == "rank_grid") c.rank_grid = value;
    else if (key == "rank_sweep_seeds") c.rank_sweep_seeds = static_cast<int>(parse_long(key, value));
    else if (key == "alignment_window") c.alignment_window = static_cast<int>(parse_long(key, value));
    else if (key == "alignment_band") c.alignment_band = parse_double(key, value);
    else if (key == "knee_window") c.knee_window = static_cast<int>(parse_long(key, value));
    else if (key == "knee_consecutive") c.knee_consecutive = static_cast<int>(parse_long(key, value));
    else if (key == "track_power") c.track_power = parse_bool(key, value);
    else if (key == "record_spectra") c.record_spectra = parse_bool(key, value);
    else if (key == "rip_rank") c.rip_rank = static_cast<int>(parse_long(key, value));
    else if (key == "rip_trials") c.rip_trials = static_cast<int>(parse_long(key, value));
    else if (key == "stat_trials") c.stat_trials = static_cast<int>(parse_long(key, value));
    else throw ValidationError("unknown configuration key '" + key + "'");
}

}  // namespace

void validate(const RunConfig& c) {
    auto positive = [](const char* name, auto v) {
        if (!(v > 0)) throw ValidationError(std::string("field '") + name + "' must be positive");
    };
    positive("n", c.n);
    positive("k", c.k);
    positive("r", c.r);
    positive("R", c.R);
    positive("m", c.m);
    positive("mu", c.mu);
    positive("alpha", c.alpha);
    positive("stride", c.stride);
    positive("tau", c.tau);
    positive("alpha_grid_points", c.alpha_grid_points);
    positive("alpha_sweep_seeds", c.alpha_sweep_seeds);
    positive("alpha_sweep_mu", c.alpha_sweep_mu);
    positive("rank_sweep_seeds", c.rank_sweep_seeds);
    positive("alignment_window", c.alignment_window);
    positive("alignment_band", c.alignment_band);
    positive("knee_consecutive", c.knee_consecutive);
    positive("rip_rank", c.rip_rank);
    positive("rip_trials", c.rip_trials);
    if (c.iters < 0) throw ValidationError("field 'iters' must be >= 0");
    if (c.stat_trials < 0) throw ValidationError("field 'stat_trials' must be >= 0");
    if (c.r > c.n) throw ValidationError("field 'r' must satisfy r <= n");
    if (c.R < c.r) throw ValidationError("field 'R' must satisfy R >= r");
    if (c.knee_window < 1 || c.knee_window % 2 == 0) {
        throw ValidationError("field 'knee_window' must be a positive odd stride count");
    }
    if (!(c.alpha_grid_min > 0.0) || !(c.alpha_grid_max > 0.0) ||
        c.alpha_grid_min > c.alpha_grid_max) {
        throw ValidationError("fields 'alpha_grid_min'/'alpha_grid_max' must be positive with min <= max");
    }
    std::vector<int> grid = c.rank_grid_values();
    if (grid.empty()) throw ValidationError("field 'rank_grid' must list at least one width");
    for (int v : grid) {
        if (v < c.r) throw ValidationError("field 'rank_grid' has width below r");
    }
}

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ParseError("line " + std::to_string(lineno) + ": empty key");
        }
        if (!seen.insert(key).second) {
            throw ParseError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        apply_field(c, key, value);
    }
    validate(c);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

RunConfig config_from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs) {
    RunConfig c;
    for (const auto& [key, value] : pairs) apply_field(c, key, value);
    validate(c);
    return c;
}

}  // namespace tubal::io

#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>

#include "gcoerce/experiments.hpp"

namespace gcoerce {

namespace {

std::string trim(const std::string& s) {
    const std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad number for " + key + ": " + value);
    }
    if (pos != value.size())
        throw std::invalid_argument("config: trailing junk in " + key + ": " + value);
    return v;
}

long to_long(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(value, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer for " + key + ": " + value);
    }
    if (pos != value.size())
        throw std::invalid_argument("config: trailing junk in " + key + ": " + value);
    return v;
}

std::vector<double> to_doubles(const std::string& key, const std::string& value) {
    std::istringstream in(value);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(to_double(key, tok));
    if (out.empty()) throw std::invalid_argument("config: empty list for " + key);
    return out;
}

Vec3 to_point(const std::string& key, const std::string& value, int dim) {
    const std::vector<double> parts = to_doubles(key, value);
    if (static_cast<int>(parts.size()) != dim)
        throw std::invalid_argument("config: " + key + " needs exactly " +
                                    std::to_string(dim) + " coordinates");
    Vec3 p = kZeroVec;
    for (int a = 0; a < dim; ++a) p[a] = parts[a];
    return p;
}

// Points separated by ';', coordinates by whitespace.
std::vector<Vec3> to_points(const std::string& key, const std::string& value, int dim) {
    std::vector<Vec3> points;
    std::size_t start = 0;
    while (start <= value.size()) {
        const std::size_t semi = value.find(';', start);
        const std::string chunk =
            trim(semi == std::string::npos ? value.substr(start)
                                           : value.substr(start, semi - start));
        if (!chunk.empty()) points.push_back(to_point(key, chunk, dim));
        if (semi == std::string::npos) break;
        start = semi + 1;
    }
    if (points.empty()) throw std::invalid_argument("config: empty point list for " + key);
    return points;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config: unterminated section at line " +
                                            std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw std::invalid_argument("config: empty section name at line " +
                                            std::to_string(lineno));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value at line " +
                                        std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config: empty key at line " + std::to_string(lineno));
        const std::string dotted = section.empty() ? key : section + "." + key;
        if (kv.count(dotted))
            throw std::invalid_argument("config: duplicate key " + dotted);
        kv[dotted] = value;
    }
    return kv;
}

ExperimentConfig config_from_key_values(const std::map<std::string, std::string>& kv) {
    ExperimentConfig config;

    // Field dimension first: point parsing depends on it.
    if (auto it = kv.find("field.dim"); it != kv.end())
        config.field.dim = static_cast<int>(to_long(it->first, it->second));
    const int dim = config.field.dim;

    bool explicit_sources = false;
    int n_sources = 0;

    for (const auto& [key, value] : kv) {
        if (key == "field.dim") {
            // handled above
        } else if (key == "field.kind") {
            config.field.kind = field_kind_from_string(value);
        } else if (key == "field.amplitude") {
            config.field.amplitude = to_double(key, value);
        } else if (key == "field.constant") {
            config.field.constant = to_point(key, value, dim);
        } else if (key == "field.wavevector") {
            config.field.wavevector = to_point(key, value, dim);
        } else if (key == "field.cell_size") {
            config.field.cell_size = to_double(key, value);
        } else if (key == "field.n_modes") {
            config.field.n_modes = static_cast<int>(to_long(key, value));
        } else if (key == "field.max_wavenumber") {
            config.field.max_wavenumber = static_cast<int>(to_long(key, value));
        } else if (key == "field.time_scale") {
            config.field.time_scale = to_double(key, value);
        } else if (key == "field.period") {
            config.field.period = to_double(key, value);
        } else if (key == "grid.n") {
            config.grid_n = static_cast<int>(to_long(key, value));
        } else if (key == "grid.h") {
            config.grid_h = to_double(key, value);
        } else if (key == "run.t0") {
            config.t0 = to_double(key, value);
        } else if (key == "run.speed") {
            config.speed = to_double(key, value);
        } else if (key == "run.horizon") {
            config.horizon = to_double(key, value);
        } else if (key == "run.delta") {
            config.delta = to_double(key, value);
        } else if (key == "run.sample_dt") {
            config.sample_dt = to_double(key, value);
        } else if (key == "run.cfl_safety") {
            config.cfl_safety = to_double(key, value);
        } else if (key == "run.threshold") {
            config.threshold = to_double(key, value);
        } else if (key == "run.box_sides") {
            config.diagnostic_box_sides = to_doubles(key, value);
        } else if (key == "run.c") {
            config.c_values = to_doubles(key, value);
        } else if (key == "run.sources") {
            config.sources = to_points(key, value, dim);
            explicit_sources = true;
        } else if (key == "run.n_sources") {
            n_sources = static_cast<int>(to_long(key, value));
        } else if (key == "stats.epsilon") {
            config.epsilon = to_double(key, value);
        } else if (key == "stats.n") {
            config.n_subdivision = static_cast<int>(to_long(key, value));
        } else if (key == "stats.r_min") {
            config.r_min = to_double(key, value);
        } else if (key == "stats.r_max") {
            config.r_max = to_double(key, value);
        } else if (key == "stats.r_ratio") {
            config.r_ratio = to_double(key, value);
        } else if (key == "stats.q") {
            config.q = static_cast<int>(to_long(key, value));
        } else if (key == "ensemble.seed_begin") {
            config.seed_begin = static_cast<std::uint64_t>(to_long(key, value));
        } else if (key == "ensemble.n_seeds") {
            config.n_seeds = static_cast<int>(to_long(key, value));
        } else if (key == "ensemble.out_dir") {
            config.out_dir = value;
        } else {
            throw std::invalid_argument("config: unknown key " + key);
        }
    }

    if (explicit_sources && n_sources > 0)
        throw std::invalid_argument("config: run.sources and run.n_sources are exclusive");
    if (n_sources > 0) config.sources = spaced_sources(config, n_sources);
    return config;
}

}  // namespace gcoerce

#include "gcoerce/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace gcoerce {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

void write_header(std::ostream& out, int dim, int n, double h, double t) {
    out << "GCOERCE1 d=" << dim << " n=" << n << " h=" << format_double(h)
        << " t=" << format_double(t) << "\n";
}

struct Header {
    int dim = 0;
    int n = 0;
    double h = 0.0;
    double t = 0.0;
};

Header read_header(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("snapshot: missing header");
    Header hd;
    if (std::sscanf(line.c_str(), "GCOERCE1 d=%d n=%d h=%lf t=%lf", &hd.dim, &hd.n, &hd.h,
                    &hd.t) != 4)
        throw std::runtime_error("snapshot: malformed header: " + line);
    if (hd.dim < 2 || hd.dim > 3 || hd.n < 4 || !(hd.h > 0.0))
        throw std::runtime_error("snapshot: header values out of range");
    return hd;
}

std::size_t payload_cells(const Header& hd) {
    std::size_t cells = 1;
    for (int a = 0; a < hd.dim; ++a) cells *= static_cast<std::size_t>(hd.n);
    return cells;
}

void write_doubles_le(std::ostream& out, const std::vector<double>& values) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(values.data()),
                  static_cast<std::streamsize>(values.size() * sizeof(double)));
    } else {
        for (double v : values) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof(bits));
            char b[8];
            for (int i = 0; i < 8; ++i) b[i] = static_cast<char>(bits >> (8 * i));
            out.write(b, 8);
        }
    }
}

void read_doubles_le(std::istream& in, std::vector<double>& values) {
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(values.data()),
                static_cast<std::streamsize>(values.size() * sizeof(double)));
    } else {
        for (double& v : values) {
            char b[8];
            in.read(b, 8);
            std::uint64_t bits = 0;
            for (int i = 0; i < 8; ++i)
                bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
            std::memcpy(&v, &bits, sizeof(v));
        }
    }
    if (!in) throw std::runtime_error("snapshot: truncated payload");
}

}  // namespace

void write_occupancy(std::ostream& out, const LevelSetState& state) {
    write_header(out, state.grid.dim, state.grid.n, state.grid.h, state.time);
    write_doubles_le(out, state.u);
}

LevelSetState read_occupancy(std::istream& in) {
    const Header hd = read_header(in);
    LevelSetState state;
    state.grid.dim = hd.dim;
    state.grid.n = hd.n;
    state.grid.h = hd.h;
    state.time = hd.t;
    state.u.resize(payload_cells(hd));
    read_doubles_le(in, state.u);
    return state;
}

void write_indicator(std::ostream& out, const ReachableSet& set) {
    write_header(out, set.grid.dim, set.grid.n, set.grid.h, set.time);
    out.write(reinterpret_cast<const char*>(set.on.data()),
              static_cast<std::streamsize>(set.on.size()));
}

ReachableSet read_indicator(std::istream& in) {
    const Header hd = read_header(in);
    ReachableSet set;
    set.grid.dim = hd.dim;
    set.grid.n = hd.n;
    set.grid.h = hd.h;
    set.time = hd.t;
    set.on.resize(payload_cells(hd));
    in.read(reinterpret_cast<char*>(set.on.data()),
            static_cast<std::streamsize>(set.on.size()));
    if (!in) throw std::runtime_error("snapshot: truncated payload");
    for (std::uint8_t v : set.on)
        if (v > 1) throw std::runtime_error("snapshot: indicator byte not 0/1");
    return set;
}

std::string waiting_csv_header(int dim) {
    std::string hdr = "seed,t0";
    for (int a = 0; a < dim; ++a) hdr += ",x" + std::to_string(a);
    hdr += ",c,T,censored,r_star,horizon\n";
    return hdr;
}

std::string waiting_csv_row(const WaitingTimeRecord& record, int dim) {
    std::ostringstream row;
    row << record.seed << ',' << format_double(record.t0);
    for (int a = 0; a < dim; ++a) row << ',' << format_double(record.source[a]);
    row << ',' << format_double(record.coercivity_c) << ',' << format_double(record.measured_T)
        << ',' << (record.censored ? 1 : 0) << ',' << format_double(record.r_star_measured)
        << ',' << format_double(record.horizon) << '\n';
    return row.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

double csv_double(const std::string& field) {
    std::size_t pos = 0;
    const double v = std::stod(field, &pos);
    if (pos != field.size()) throw std::runtime_error("csv: bad number: " + field);
    return v;
}

}  // namespace

std::vector<WaitingTimeRecord> read_waiting_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    int dim = 0;
    for (int d = 2; d <= 3; ++d) {
        std::string expected = waiting_csv_header(d);
        expected.pop_back();
        if (line == expected) dim = d;
    }
    if (dim == 0) throw std::runtime_error("csv: unrecognized header: " + line);

    std::vector<WaitingTimeRecord> records;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != static_cast<std::size_t>(7 + dim))
            throw std::runtime_error("csv: wrong field count in: " + line);
        WaitingTimeRecord rec;
        rec.seed = std::stoull(f[0]);
        rec.t0 = csv_double(f[1]);
        for (int a = 0; a < dim; ++a) rec.source[a] = csv_double(f[2 + a]);
        rec.coercivity_c = csv_double(f[2 + dim]);
        rec.measured_T = csv_double(f[3 + dim]);
        if (f[4 + dim] != "0" && f[4 + dim] != "1")
            throw std::runtime_error("csv: censored flag must be 0/1 in: " + line);
        rec.censored = f[4 + dim] == "1";
        rec.r_star_measured = csv_double(f[5 + dim]);
        rec.horizon = csv_double(f[6 + dim]);
        records.push_back(rec);
    }
    return records;
}

}  // namespace gcoerce

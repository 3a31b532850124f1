#pragma once

#include <iosfwd>
#include <string>

#include "gcoerce/frontier.hpp"

namespace gcoerce {

// Grid snapshot format: one UTF-8 header line
//   GCOERCE1 d=<d> n=<cells-per-axis> h=<spacing> t=<time>
// followed by the payload in row-major order, x fastest. Occupancy snapshots
// store little-endian 64-bit floats; indicator snapshots store bytes 0/1.
void write_occupancy(std::ostream& out, const LevelSetState& state);
LevelSetState read_occupancy(std::istream& in);

void write_indicator(std::ostream& out, const ReachableSet& set);
ReachableSet read_indicator(std::istream& in);

// Fixed-order waiting-time CSV columns. Doubles are printed with %.17g so a
// round trip through text is exact; censored flags are 0/1.
std::string waiting_csv_header(int dim);
std::string waiting_csv_row(const WaitingTimeRecord& record, int dim);

// Reads rows written by waiting_csv_row. Only the persisted columns are
// recovered; diagnostic curves stay empty.
std::vector<WaitingTimeRecord> read_waiting_csv(std::istream& in);

// 17 significant digits, enough to parse back to exactly the same double.
std::string format_double(double v);

}  // namespace gcoerce

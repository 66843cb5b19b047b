#pragma once

#include <string>

#include "koopman/dynamics.hpp"

namespace koopman {

/// CSV schema: `#`-prefixed metadata comments, a header `x1,...,xn,y1,...,yn`,
/// then one snapshot pair per row at 17 significant digits (round-trip exact
/// for finite doubles).
void save_snapshots(const SnapshotData& data, const std::string& path);

/// Parse a snapshot CSV. Throws ParseError (with the 1-based line number) on
/// malformed headers, inconsistent column counts, non-numeric fields, or a
/// file with no data rows.
SnapshotData load_snapshots(const std::string& path);

/// printf "%.17g" — shared formatting for all CSV numeric output.
std::string format_full(double value);

}  // namespace koopman

#pragma once

#include <string>

#include "nashlab/grid.hpp"

namespace nashlab {

/// Binary field container: 8-byte magic, little-endian u64 header length,
/// JSON header (grid metadata, times, name), then the raw little-endian f64
/// payload, time-major slices in row-major multi-index order.
void save_field(const Field& field, const std::string& path, const std::string& name = "field");

/// Loads and validates a field container (magic, sizes, finite payload).
Field load_field(const std::string& path, std::string* name_out = nullptr);

}  // namespace nashlab

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "weylflow/identities.hpp"

namespace weylflow {

/// Formats a double with 17 significant digits (round-trip exact), so that
/// identical inputs yield byte-identical reports.
std::string format_double(double x);

std::string json_escape(const std::string& s);

/// Versioned check-report document ("schema": 1). Deterministic: fixed key
/// order, results sorted by (check_id, metric), no timestamps.
std::string reports_to_json(std::span<const CheckReport> reports, std::uint64_t seed,
                            int point_count);

int count_failures(std::span<const CheckReport> reports);

/// CSV with a fixed documented header; fields are 17-digit doubles.
std::string csv_line(std::span<const double> values);

}  // namespace weylflow

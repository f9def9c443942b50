#pragma once

// Locale-independent number formatting and the run manifest attached to
// every emitted data file.

#include <cstdint>
#include <map>
#include <string>

namespace occuthresh {

/// Shortest decimal string that round-trips `x`; "inf", "-inf", "nan" for
/// non-finite values. Never depends on the global locale.
std::string format_double(double x);

/// Fixed-precision variant for human-facing tables.
std::string format_fixed(double x, int digits);

struct RunManifest {
  std::string subcommand;
  std::map<std::string, std::string> parameters;
  std::uint64_t master_seed = 0;
  bool has_seed = false;
  unsigned threads = 1;
  std::string tool_version;
  std::string started_at;  ///< ISO-8601 UTC
  std::string finished_at;

  /// JSON object; keys in fixed order.
  std::string to_json() const;
};

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

}  // namespace occuthresh

#pragma once

#include <string>
#include <vector>

namespace relnav::orbits {

/// Constellation-qualified satellite identifier, e.g. "G01" or "R12".
/// The leading letter names the constellation.
struct SatId {
  std::string value;

  char constellation() const { return value.empty() ? '?' : value.front(); }
  bool operator==(const SatId&) const = default;
  auto operator<=>(const SatId&) const = default;
};

/// Keplerian almanac entry for one satellite.
struct AlmanacRecord {
  SatId sat_id;
  double sqrt_semimajor = 0.0;        // m^(1/2)
  double eccentricity = 0.0;          // dimensionless, [0, 1)
  double inclination = 0.0;           // rad
  double raan_at_week_epoch = 0.0;    // rad
  double raan_rate = 0.0;             // rad/s
  double arg_perigee = 0.0;           // rad
  double mean_anomaly_at_epoch = 0.0; // rad
  double toa = 0.0;                   // s, time of applicability within week
  int week = 0;

  void validate() const;  // throws on invariant violation
};

struct AlmanacDiagnostic {
  int block_index = 0;       // zero-based position of the block in the document
  std::string message;
};

struct AlmanacParseResult {
  std::vector<AlmanacRecord> records;
  std::vector<AlmanacDiagnostic> diagnostics;
};

/// Parses a YUMA-style almanac document: blocks of `key: value` lines
/// separated by blank lines. Keys are matched case-insensitively and
/// tolerate the unit suffixes of the published format. Malformed blocks
/// are reported as diagnostics; well-formed blocks are retained.
/// Throws on an empty document.
AlmanacParseResult parse_almanac(const std::string& text);

/// parse_almanac over the contents of a file.
AlmanacParseResult parse_almanac_file(const std::string& path);

}  // namespace relnav::orbits

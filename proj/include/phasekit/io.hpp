#pragma once

// File formats: JSON operator files, CSV grids, QPD grids and measurement
// records with JSON sidecars, and JSON reports.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "phasekit/backend.hpp"
#include "phasekit/sw_core.hpp"
#include "phasekit/tomography.hpp"

namespace phasekit::io {

using json = nlohmann::json;

/// {"basis": {"kind": "fock"|"spin", "param": p}, "entries": [[re, im], ...]}
/// with entries in row-major order.
json operator_to_json(const HilbertOperator& a);
HilbertOperator operator_from_json(const json& j);

json read_json(const std::string& path);
/// Writes j.dump(2) plus a trailing newline.
void write_json(const std::string& path, const json& j);
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

void write_operator(const std::string& path, const HilbertOperator& a);
HilbertOperator read_operator(const std::string& path);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double x);

/// 64-bit FNV-1a of the compact dump, as 16 hex digits.
std::string config_hash(const json& config);

/// Path of the JSON sidecar that accompanies a CSV file.
std::string sidecar_path(const std::string& csv_path);

/// Header (theta,phi,weight) or (re_alpha,im_alpha,weight).
std::string grid_csv(const QuadratureGrid& grid);

/// Header coord1,coord2,weight,re_value,im_value.
std::string qpd_csv(const QuadratureGrid& grid, const QPDGrid& f);
json qpd_sidecar(const Backend& b, const QPDGrid& f);

/// Header coord1,coord2,ruler_kind,ruler_index,probability,shots,eta.
/// ruler_index is n for fock, 2 mu for spin and the position in the
/// sidecar's "custom_rulers" list for custom states.
std::string records_csv(const std::vector<MeasurementRecord>& records);
/// {backend, grid, seed, custom_rulers}.
json records_sidecar(const Backend& b, const std::vector<MeasurementRecord>& records,
                     std::uint64_t seed);

/// Parses a records file for backend b. The sidecar may be empty; it is
/// required only when the file references custom rulers. Throws FormatError
/// with the offending line.
std::vector<MeasurementRecord> parse_records_csv(const std::string& text, const Backend& b,
                                                 const json& sidecar = json());
std::vector<MeasurementRecord> read_records(const std::string& csv_path, const Backend& b);

json reconstruction_report(const DensityReconstruction& r);
json postulate_report(const PostulateReport& r);

}  // namespace phasekit::io

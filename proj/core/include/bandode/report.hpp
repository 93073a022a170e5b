#pragma once

// Deterministic artifact writers: canonical JSON (sorted keys, floats with
// 17 significant digits), trajectory CSV (header t,u,v, LF endings), and a
// fixed-canvas SVG plot.  Identical inputs must produce byte-identical
// files.

#include <string>
#include <vector>

#include "bandode/curve.hpp"
#include "bandode/flow.hpp"

#include <json.hpp>

namespace bandode {

// Canonical rendering: object keys sorted, no insignificant whitespace,
// floating-point numbers via "%.17g", non-finite numbers as null.
std::string canonical_json(const nlohmann::json& j);

void write_text_file(const std::string& path, const std::string& contents);

std::string trajectory_csv(const std::vector<StateSample>& samples);
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Strict reader for the t,u,v schema; throws CsvError on a header or field
// mismatch.
std::vector<StateSample> read_trajectory_csv(const std::string& path);

// FNV-1a 64-bit, hex-encoded; used as the inputs digest in reports.
std::string fnv1a64_hex(const std::string& bytes);

struct SvgSeries {
    std::vector<StateSample> samples;  // plotted as u over t
    std::string color;
};

// Fixed 800x500 canvas, 5% padding of the data range on both axes.  The
// band curves (when given) are sampled on a fixed grid.
std::string svg_plot(const std::vector<SvgSeries>& series, const Band* band,
                     const Curve* highlight);

}  // namespace bandode

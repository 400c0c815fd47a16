#ifndef LFS_REPORT_HPP
#define LFS_REPORT_HPP

#include <string>
#include <vector>

#include "lfs/spectral.hpp"

namespace lfs {

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// FNV-1a over the canonical config text; stamped into every manifest so
// a run can be tied back to its exact configuration.
std::uint64_t fnv1a(const std::string& text);

// Every command writes one of these into its output directory before
// doing real work. Reproducing a run takes the command, config and seed.
struct RunManifest {
    std::string command;
    std::string version;
    std::uint64_t seed = 0;
    std::string config_text; // empty if the command takes no config
    std::vector<std::string> args;

    std::string to_json() const;
};

void write_manifest(const std::string& out_dir, const RunManifest& manifest);

// Radius/energy CSV for radial spectra. Optional second series adds an
// energy2 and rel_dev column (|e2-e1| / e1).
std::string radial_csv(const RadialSpectrum& a, const RadialSpectrum* b = nullptr);

struct SvgSeries {
    std::string label;
    std::vector<double> y; // x is the index
};

// Minimal SVG polyline chart, log10 y-axis; CSV stays the source of truth.
std::string svg_line_chart(const std::vector<SvgSeries>& series, const std::string& title,
                           const std::string& x_label, const std::string& y_label);

} // namespace lfs

#endif

#include "lfs/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lfs/errors.hpp"

namespace fs = std::filesystem;

namespace lfs {

using json = nlohmann::json;

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot write '" + path + "'");
    f << content;
    if (!f) throw io_error("short write to '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot read '" + path + "'");
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string RunManifest::to_json() const {
    json j;
    j["command"] = command;
    j["version"] = version;
    j["seed"] = seed;
    j["config_hash"] = fnv1a(config_text);
    j["args"] = args;
    return j.dump(2) + "\n";
}

void write_manifest(const std::string& out_dir, const RunManifest& manifest) {
    fs::create_directories(out_dir);
    write_text_file((fs::path(out_dir) / "manifest.json").string(), manifest.to_json());
    if (!manifest.config_text.empty())
        write_text_file((fs::path(out_dir) / "config.json").string(), manifest.config_text);
}

std::string radial_csv(const RadialSpectrum& a, const RadialSpectrum* b) {
    std::ostringstream os;
    os.precision(12);
    if (b) {
        require(b->values.size() == a.values.size(), "radial_csv: length mismatch");
        os << "radius,energy,energy2,rel_dev\n";
        for (std::size_t k = 0; k < a.values.size(); ++k) {
            const double e1 = a.values[k], e2 = b->values[k];
            const double rel = e1 != 0.0 ? std::abs(e2 - e1) / e1
                                         : (e2 == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
            os << k << ',' << e1 << ',' << e2 << ',' << rel << '\n';
        }
    } else {
        os << "radius,energy\n";
        for (std::size_t k = 0; k < a.values.size(); ++k) os << k << ',' << a.values[k] << '\n';
    }
    return os.str();
}

std::string svg_line_chart(const std::vector<SvgSeries>& series, const std::string& title,
                           const std::string& x_label, const std::string& y_label) {
    const int width = 720, height = 480;
    const int ml = 70, mr = 20, mt = 40, mb = 50;
    const double plot_w = width - ml - mr, plot_h = height - mt - mb;
    static const char* colors[] = {"#4363d8", "#e6194b", "#3cb44b", "#f58231", "#911eb4"};

    std::size_t n = 0;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& s : series) {
        n = std::max(n, s.y.size());
        for (double v : s.y)
            if (v > 0.0) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
    }
    if (!(hi > 0.0)) {
        lo = 1e-12;
        hi = 1.0;
    }
    const double ylo = std::floor(std::log10(lo)), yhi = std::ceil(std::log10(hi));
    const double yspan = std::max(1.0, yhi - ylo);

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
       << title << "</text>\n";
    // axes
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + plot_h
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt + plot_h << "\" x2=\"" << ml + plot_w
       << "\" y2=\"" << mt + plot_h << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << ml + plot_w / 2 << "\" y=\"" << height - 12
       << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
    os << "<text x=\"18\" y=\"" << mt + plot_h / 2
       << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 18 "
       << mt + plot_h / 2 << ")\">" << y_label << " (log10)</text>\n";
    for (int g = 0; g <= static_cast<int>(yspan); ++g) {
        const double fy = mt + plot_h - plot_h * g / yspan;
        os << "<line x1=\"" << ml << "\" y1=\"" << fy << "\" x2=\"" << ml + plot_w << "\" y2=\""
           << fy << "\" stroke=\"#dddddd\"/>\n";
        os << "<text x=\"" << ml - 8 << "\" y=\"" << fy + 4
           << "\" text-anchor=\"end\" font-size=\"10\">1e" << static_cast<int>(ylo) + g
           << "</text>\n";
    }
    int ci = 0;
    for (const auto& s : series) {
        os << "<polyline fill=\"none\" stroke=\"" << colors[ci % 5] << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.y.size(); ++i) {
            const double x = ml + (n > 1 ? plot_w * i / (n - 1) : 0.0);
            const double vy = s.y[i] > 0.0 ? std::log10(s.y[i]) : ylo;
            const double y = mt + plot_h - plot_h * std::clamp((vy - ylo) / yspan, 0.0, 1.0);
            os << x << ',' << y << ' ';
        }
        os << "\"/>\n";
        os << "<text x=\"" << ml + plot_w - 150 << "\" y=\"" << mt + 16 + 16 * ci
           << "\" font-size=\"12\" fill=\"" << colors[ci % 5] << "\">" << s.label << "</text>\n";
        ++ci;
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace lfs

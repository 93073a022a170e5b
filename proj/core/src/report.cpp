#include "bandode/report.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bandode {

namespace {

std::string format_g17(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void render(const nlohmann::json& j, std::string& out) {
    using nlohmann::json;
    switch (j.type()) {
        case json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                out += json(it.key()).dump();
                out += ':';
                render(it.value(), out);
            }
            out += '}';
            break;
        }
        case json::value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += ',';
                first = false;
                render(v, out);
            }
            out += ']';
            break;
        }
        case json::value_t::number_float:
            out += format_g17(j.get<double>());
            break;
        default:
            out += j.dump();
            break;
    }
}

}  // namespace

std::string canonical_json(const nlohmann::json& j) {
    std::string out;
    render(j, out);
    out += '\n';
    return out;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << contents;
}

std::string trajectory_csv(const std::vector<StateSample>& samples) {
    std::string out = "t,u,v\n";
    char buf[128];
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", s.t, s.u, s.v);
        out += buf;
    }
    return out;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    write_text_file(path, trajectory_csv(traj.samples));
}

std::vector<StateSample> read_trajectory_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError("cannot open CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw CsvError("empty CSV: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,u,v")
        throw CsvError("CSV header mismatch in " + path + ": expected \"t,u,v\", got \"" +
                       line + "\"");
    std::vector<StateSample> samples;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        StateSample s;
        char extra;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf%c", &s.t, &s.u, &s.v, &extra) != 3)
            throw CsvError("CSV field mismatch in " + path + " line " +
                           std::to_string(line_no));
        samples.push_back(s);
    }
    return samples;
}

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b",
                          "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#ff7f0e"};

std::string fmt_coord(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace

std::string svg_plot(const std::vector<SvgSeries>& series, const Band* band,
                     const Curve* highlight) {
    const double W = 800.0, H = 500.0;
    const int band_samples = 512;

    double tmin = 0.0, tmax = 1.0, umin = 0.0, umax = 1.0;
    bool have_range = false;
    auto grow = [&](double t, double u) {
        if (!have_range) {
            tmin = tmax = t;
            umin = umax = u;
            have_range = true;
        } else {
            tmin = std::min(tmin, t);
            tmax = std::max(tmax, t);
            umin = std::min(umin, u);
            umax = std::max(umax, u);
        }
    };
    for (const auto& s : series)
        for (const auto& p : s.samples) grow(p.t, p.u);
    if (band) {
        double lo = band->lower.min_value(), hi = band->upper.max_value();
        if (have_range) {
            grow(tmin, lo);
            grow(tmax, hi);
        } else {
            grow(0.0, lo);
            grow(band->lower.period(), hi);
        }
    }
    if (!have_range) grow(0.0, 0.0), grow(1.0, 1.0);
    if (tmax == tmin) tmax = tmin + 1.0;
    if (umax == umin) umax = umin + 1.0;
    double tpad = 0.05 * (tmax - tmin), upad = 0.05 * (umax - umin);
    tmin -= tpad;
    tmax += tpad;
    umin -= upad;
    umax += upad;

    auto X = [&](double t) { return (t - tmin) / (tmax - tmin) * W; };
    auto Y = [&](double u) { return H - (u - umin) / (umax - umin) * H; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" "
           "viewBox=\"0 0 800 500\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"#ffffff\" "
           "stroke=\"#000000\" stroke-width=\"1\"/>\n";

    auto polyline = [&](const std::vector<std::pair<double, double>>& pts,
                        const std::string& color, const char* dash, double width) {
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width
            << "\"";
        if (dash) svg << " stroke-dasharray=\"" << dash << "\"";
        svg << " points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i) svg << ' ';
            svg << fmt_coord(X(pts[i].first)) << ',' << fmt_coord(Y(pts[i].second));
        }
        svg << "\"/>\n";
    };

    auto sample_curve = [&](const Curve& c) {
        std::vector<std::pair<double, double>> pts;
        pts.reserve(band_samples + 1);
        for (int i = 0; i <= band_samples; ++i) {
            double t = tmin + (tmax - tmin) * i / band_samples;
            pts.push_back({t, c.value(t)});
        }
        return pts;
    };

    if (band) {
        polyline(sample_curve(band->lower), "#444444", "6,4", 1.5);
        polyline(sample_curve(band->upper), "#444444", "6,4", 1.5);
    }
    if (highlight) polyline(sample_curve(*highlight), "#000000", nullptr, 2.0);

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        std::string color = s.color.empty() ? kPalette[k % 10] : s.color;
        std::vector<std::pair<double, double>> pts;
        pts.reserve(s.samples.size());
        for (const auto& p : s.samples) pts.push_back({p.t, p.u});
        polyline(pts, color, nullptr, 1.0);
    }

    svg << "</svg>\n";
    return svg.str();
}

}  // namespace bandode

#include "tsgame/output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tsgame {

namespace {

std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fixed2(double v) {
    if (std::abs(v) < 0.005) v = 0.0;  // no "-0.00"
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
}

std::string tick_label(double v) {
    if (std::abs(v) < 1e-12) return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 4);
    return std::string(buf, res.ptr);
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

double parse_field(const std::string& s) {
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("read_csv: bad number '" + s + "'");
    }
    return v;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

/// Round step 1, 2 or 5 times a power of ten giving about `n` ticks.
double nice_step(double span, int n) {
    const double raw = span / n;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double f = raw / mag;
    const double m = f < 1.5 ? 1 : f < 3.5 ? 2 : f < 7.5 ? 5 : 10;
    return m * mag;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

void CsvTable::add(std::string name, Vec values) {
    if (values.size() != time_.size()) {
        throw std::invalid_argument("CsvTable: column '" + name + "' does not match the time grid");
    }
    names_.push_back(std::move(name));
    columns_.push_back(std::move(values));
}

std::string CsvTable::str(std::size_t every) const {
    if (every == 0) every = 1;
    std::string out = "time";
    for (const auto& n : names_) out += "," + n;
    out += "\n";
    const auto rows = static_cast<std::size_t>(time_.size());
    for (std::size_t r = 0; r < rows; ++r) {
        if (r % every != 0 && r + 1 != rows) continue;
        const auto ri = static_cast<Eigen::Index>(r);
        out += shortest(time_(ri));
        for (const auto& c : columns_) {
            out += ",";
            if (std::isfinite(c(ri))) out += shortest(c(ri));
        }
        out += "\n";
    }
    return out;
}

void CsvTable::write(const std::filesystem::path& path, std::size_t every) const { write_text(path, str(every)); }

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_csv: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file " + path.string());
    const auto header = split(line);
    if (header.empty() || header.front() != "time") {
        throw std::runtime_error("read_csv: first column must be 'time'");
    }
    std::vector<std::vector<double>> cols(header.size());
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split(line);
        if (fields.size() != header.size()) {
            throw std::runtime_error("read_csv: line " + std::to_string(lineno) + " has the wrong field count");
        }
        for (std::size_t k = 0; k < fields.size(); ++k) cols[k].push_back(parse_field(fields[k]));
    }
    auto to_vec = [](const std::vector<double>& v) {
        return Vec(Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    CsvTable t(to_vec(cols[0]));
    for (std::size_t k = 1; k < header.size(); ++k) t.add(header[k], to_vec(cols[k]));
    return t;
}

std::string render_svg(const PlotSpec& plot) {
    if (plot.series.empty()) throw std::invalid_argument("render_svg: no series");
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    bool any = false;
    auto extend = [&](double x, double y) {
        if (!std::isfinite(x) || !std::isfinite(y)) return;
        any = true;
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    };
    for (const auto& s : plot.series) {
        if (s.x.size() == 0 || s.x.size() != s.y.size()) throw std::invalid_argument("render_svg: empty or misaligned series");
        const bool band = s.lower.size() == s.x.size() && s.upper.size() == s.x.size();
        for (Eigen::Index k = 0; k < s.x.size(); ++k) {
            extend(s.x(k), s.y(k));
            if (band) {
                extend(s.x(k), s.lower(k));
                extend(s.x(k), s.upper(k));
            }
        }
    }
    if (!any) throw std::invalid_argument("render_svg: no finite points");
    if (x1 - x0 <= 0) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if (y1 - y0 <= 0) {
        const double pad = std::max(0.5, 0.1 * std::abs(y0));
        y0 -= pad;
        y1 += pad;
    } else {
        const double pad = 0.05 * (y1 - y0);
        y0 -= pad;
        y1 += pad;
    }

    const double width = 720, height = 440;
    const double left = 70, right = 20, top = 40, bottom = 55;
    const double pw = width - left - right, ph = height - top - bottom;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed2(width) << "\" height=\"" << fixed2(height)
      << "\" viewBox=\"0 0 " << fixed2(width) << " " << fixed2(height) << "\">\n";
    o << "<rect x=\"0\" y=\"0\" width=\"" << fixed2(width) << "\" height=\"" << fixed2(height) << "\" fill=\"#ffffff\"/>\n";
    o << "<text x=\"" << fixed2(width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
      << xml_escape(plot.title) << "</text>\n";

    // axes and ticks
    o << "<g stroke=\"#000000\" stroke-width=\"1\" fill=\"none\">\n";
    o << "<line x1=\"" << fixed2(left) << "\" y1=\"" << fixed2(top + ph) << "\" x2=\"" << fixed2(left + pw) << "\" y2=\""
      << fixed2(top + ph) << "\"/>\n";
    o << "<line x1=\"" << fixed2(left) << "\" y1=\"" << fixed2(top) << "\" x2=\"" << fixed2(left) << "\" y2=\""
      << fixed2(top + ph) << "\"/>\n";
    o << "</g>\n";
    o << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#000000\">\n";
    const double xs = nice_step(x1 - x0, 6);
    for (double t = std::ceil(x0 / xs) * xs; t <= x1 + 1e-9 * xs; t += xs) {
        o << "<line x1=\"" << fixed2(px(t)) << "\" y1=\"" << fixed2(top + ph) << "\" x2=\"" << fixed2(px(t)) << "\" y2=\""
          << fixed2(top + ph + 5) << "\" stroke=\"#000000\"/>\n";
        o << "<text x=\"" << fixed2(px(t)) << "\" y=\"" << fixed2(top + ph + 18) << "\" text-anchor=\"middle\">"
          << tick_label(t) << "</text>\n";
    }
    const double ys = nice_step(y1 - y0, 6);
    for (double t = std::ceil(y0 / ys) * ys; t <= y1 + 1e-9 * ys; t += ys) {
        o << "<line x1=\"" << fixed2(left - 5) << "\" y1=\"" << fixed2(py(t)) << "\" x2=\"" << fixed2(left) << "\" y2=\""
          << fixed2(py(t)) << "\" stroke=\"#000000\"/>\n";
        o << "<text x=\"" << fixed2(left - 8) << "\" y=\"" << fixed2(py(t) + 4) << "\" text-anchor=\"end\">"
          << tick_label(t) << "</text>\n";
    }
    o << "<text x=\"" << fixed2(left + pw / 2) << "\" y=\"" << fixed2(height - 12) << "\" text-anchor=\"middle\">"
      << xml_escape(plot.x_label) << "</text>\n";
    o << "<text x=\"16\" y=\"" << fixed2(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << fixed2(top + ph / 2) << ")\">" << xml_escape(plot.y_label) << "</text>\n";
    o << "</g>\n";

    for (std::size_t si = 0; si < plot.series.size(); ++si) {
        const auto& s = plot.series[si];
        const char* color = kPalette[si % std::size(kPalette)];
        const bool band = s.lower.size() == s.x.size() && s.upper.size() == s.x.size();
        if (band) {
            std::string pts;
            for (Eigen::Index k = 0; k < s.x.size(); ++k) {
                if (!std::isfinite(s.upper(k)) || !std::isfinite(s.x(k))) continue;
                pts += fixed2(px(s.x(k))) + "," + fixed2(py(s.upper(k))) + " ";
            }
            for (Eigen::Index k = s.x.size() - 1; k >= 0; --k) {
                if (!std::isfinite(s.lower(k)) || !std::isfinite(s.x(k))) continue;
                pts += fixed2(px(s.x(k))) + "," + fixed2(py(s.lower(k))) + " ";
            }
            if (!pts.empty()) pts.pop_back();
            o << "<polygon points=\"" << pts << "\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
        }
        // polyline segments between NaNs
        std::string pts;
        auto flush = [&] {
            if (pts.empty()) return;
            pts.pop_back();
            o << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
              << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
            pts.clear();
        };
        for (Eigen::Index k = 0; k < s.x.size(); ++k) {
            if (!std::isfinite(s.x(k)) || !std::isfinite(s.y(k))) {
                flush();
                continue;
            }
            pts += fixed2(px(s.x(k))) + "," + fixed2(py(s.y(k))) + " ";
        }
        flush();
    }

    // legend
    o << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (std::size_t si = 0; si < plot.series.size(); ++si) {
        const double ly = top + 12 + 16 * static_cast<double>(si);
        const char* color = kPalette[si % std::size(kPalette)];
        o << "<line x1=\"" << fixed2(left + 12) << "\" y1=\"" << fixed2(ly) << "\" x2=\"" << fixed2(left + 36) << "\" y2=\""
          << fixed2(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\""
          << (plot.series[si].dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
        o << "<text x=\"" << fixed2(left + 42) << "\" y=\"" << fixed2(ly + 4) << "\">" << xml_escape(plot.series[si].label)
          << "</text>\n";
    }
    o << "</g>\n</svg>\n";
    return o.str();
}

void emit_svg(const std::filesystem::path& path, const PlotSpec& plot) { write_text(path, render_svg(plot)); }

PlotSpec plot_from_table(const CsvTable& table, const std::string& title) {
    PlotSpec p;
    p.title = title;
    const auto& names = table.names();
    auto find = [&](const std::string& n) -> const Vec* {
        for (std::size_t k = 0; k < names.size(); ++k) {
            if (names[k] == n) return &table.columns()[k];
        }
        return nullptr;
    };
    auto starts = [](const std::string& s, const char* pre) { return s.rfind(pre, 0) == 0; };
    for (std::size_t k = 0; k < names.size(); ++k) {
        const auto& n = names[k];
        if (starts(n, "std_") || starts(n, "lower_") || starts(n, "upper_")) continue;
        PlotSeries s;
        s.x = table.time();
        s.y = table.columns()[k];
        s.label = n;
        if (starts(n, "mean_")) {
            const std::string q = n.substr(5);
            s.label = q;
            if (const Vec* lo = find("lower_" + q)) s.lower = *lo;
            if (const Vec* hi = find("upper_" + q)) s.upper = *hi;
        }
        p.series.push_back(std::move(s));
    }
    if (p.series.empty()) throw std::invalid_argument("plot_from_table: no plottable columns");
    return p;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

}  // namespace tsgame

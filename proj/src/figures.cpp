#include "dia/figures.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dia/csv.hpp"

namespace dia {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kMargin = 60.0;

struct Range {
    double lo = 0.0;
    double hi = 1.0;

    double map(double v, double out_lo, double out_hi) const {
        const double span = hi - lo;
        const double t = span == 0.0 ? 0.5 : (v - lo) / span;
        return out_lo + t * (out_hi - out_lo);
    }
};

Range span_of(const std::vector<double>& v) {
    Range r{v.front(), v.front()};
    for (double x : v) {
        r.lo = std::min(r.lo, x);
        r.hi = std::max(r.hi, x);
    }
    if (r.lo == r.hi) {
        r.lo -= 0.5;
        r.hi += 0.5;
    }
    return r;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

void open_svg(std::ostringstream& ss, const std::string& title) {
    ss << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    ss << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    ss << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" "
       << "font-family=\"sans-serif\">" << escape(title) << "</text>\n";
}

}  // namespace

std::string svg_scatter(const std::string& title, const std::string& x_label, const std::string& y_label,
                        const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.empty()) throw std::invalid_argument("svg_scatter: bad point set");
    const Range rx = span_of(xs);
    const Range ry = span_of(ys);

    std::ostringstream ss;
    open_svg(ss, title);
    ss << "<!-- data\n" << x_label << "," << y_label << "\n";
    for (std::size_t i = 0; i < xs.size(); ++i)
        ss << format_double(xs[i]) << "," << format_double(ys[i]) << "\n";
    ss << "-->\n";

    ss << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\"" << kWidth - kMargin
       << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"black\"/>\n";
    ss << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\""
       << kHeight - kMargin << "\" stroke=\"black\"/>\n";
    ss << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 16 << "\" text-anchor=\"middle\" "
       << "font-size=\"12\" font-family=\"sans-serif\">" << escape(x_label) << "</text>\n";
    ss << "<text x=\"18\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" font-size=\"12\" "
       << "font-family=\"sans-serif\" transform=\"rotate(-90 18 " << kHeight / 2 << ")\">"
       << escape(y_label) << "</text>\n";

    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double px = rx.map(xs[i], kMargin, kWidth - kMargin);
        const double py = ry.map(ys[i], kHeight - kMargin, kMargin);
        ss << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"2.5\" fill=\"steelblue\" "
           << "fill-opacity=\"0.7\"/>\n";
    }
    ss << "</svg>\n";
    return ss.str();
}

std::string svg_bars(const std::string& title, const std::vector<std::string>& labels,
                     const std::vector<double>& heights) {
    if (labels.size() != heights.size() || labels.empty()) throw std::invalid_argument("svg_bars: bad input");
    double max_h = 0.0;
    for (double h : heights) max_h = std::max(max_h, h);
    if (max_h == 0.0) max_h = 1.0;

    std::ostringstream ss;
    open_svg(ss, title);
    ss << "<!-- data\nfeature,value\n";
    for (std::size_t i = 0; i < labels.size(); ++i) ss << labels[i] << "," << format_double(heights[i]) << "\n";
    ss << "-->\n";

    const double plot_w = kWidth - 2 * kMargin;
    const double plot_h = kHeight - 2 * kMargin;
    const double slot = plot_w / static_cast<double>(labels.size());
    const double bar_w = slot * 0.7;

    ss << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\"" << kWidth - kMargin
       << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"black\"/>\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double h = heights[i] / max_h * plot_h;
        const double x = kMargin + slot * static_cast<double>(i) + (slot - bar_w) / 2.0;
        const double y = kHeight - kMargin - h;
        ss << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << bar_w << "\" height=\"" << h
           << "\" fill=\"steelblue\"/>\n";
        ss << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << kHeight - kMargin + 14
           << "\" text-anchor=\"middle\" font-size=\"10\" font-family=\"sans-serif\">" << escape(labels[i])
           << "</text>\n";
    }
    ss << "</svg>\n";
    return ss.str();
}

}  // namespace dia

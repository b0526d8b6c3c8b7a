#include "xai/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "xai/common.hpp"

namespace xai {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kMarginLeft = 140.0;
constexpr double kMarginRight = 30.0;
constexpr double kMarginTop = 50.0;
constexpr double kMarginBottom = 70.0;

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
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

// Symmetric diverging scale anchored at 0: -1 cold blue, +1 warm red.
std::string diverging_color(double v) {
    v = std::clamp(v, -1.0, 1.0);
    const int cold[3] = {33, 102, 172};
    const int warm[3] = {178, 24, 43};
    const int white[3] = {255, 255, 255};
    const int* end = v < 0 ? cold : warm;
    const double t = std::abs(v);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "rgb(%d,%d,%d)",
                  static_cast<int>(std::lround(white[0] + t * (end[0] - white[0]))),
                  static_cast<int>(std::lround(white[1] + t * (end[1] - white[1]))),
                  static_cast<int>(std::lround(white[2] + t * (end[2] - white[2]))));
    return buf;
}

std::ofstream open_file(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write report file: " + path);
    return out;
}

void svg_header(std::ostream& out, const std::string& title) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" "
           "font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n"
        << "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << xml_escape(title) << "</text>\n";
}

struct Axis {
    double lo, hi;  // data range
    double pix_lo, pix_hi;
    double to_pix(double v) const {
        const double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
        return pix_lo + t * (pix_hi - pix_lo);
    }
};

Axis make_axis(double lo, double hi, double pix_lo, double pix_hi) {
    if (hi <= lo) {
        lo -= 0.5;
        hi += 0.5;
    } else {
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    return {lo, hi, pix_lo, pix_hi};
}

}  // namespace

void emit_heatmap(const std::vector<std::string>& row_labels,
                  const std::vector<std::string>& col_labels, const Eigen::MatrixXd& values,
                  const std::string& path_stem, const std::string& title) {
    const Eigen::Index nr = values.rows();
    const Eigen::Index nc = values.cols();
    if (nr != static_cast<Eigen::Index>(row_labels.size()) ||
        nc != static_cast<Eigen::Index>(col_labels.size()))
        throw ValidationError("heatmap: label/matrix shape mismatch");
    if (values.size() > 0 && (values.minCoeff() < -1.0 || values.maxCoeff() > 1.0))
        throw ValidationError("heatmap: values must lie in [-1, 1]");

    {
        auto csv = open_file(path_stem + ".csv");
        csv << "row";
        for (const auto& c : col_labels) csv << ',' << c;
        csv << '\n';
        for (Eigen::Index i = 0; i < nr; ++i) {
            csv << row_labels[static_cast<std::size_t>(i)];
            for (Eigen::Index j = 0; j < nc; ++j) csv << ',' << format_double(values(i, j));
            csv << '\n';
        }
    }

    auto svg = open_file(path_stem + ".svg");
    svg_header(svg, title);
    const double cell_w = (kWidth - kMarginLeft - kMarginRight) / static_cast<double>(nc);
    const double cell_h = (kHeight - kMarginTop - kMarginBottom) / static_cast<double>(nr);
    for (Eigen::Index i = 0; i < nr; ++i) {
        for (Eigen::Index j = 0; j < nc; ++j) {
            svg << "<rect x=\"" << fmt2(kMarginLeft + j * cell_w) << "\" y=\""
                << fmt2(kMarginTop + i * cell_h) << "\" width=\"" << fmt2(cell_w)
                << "\" height=\"" << fmt2(cell_h) << "\" fill=\""
                << diverging_color(values(i, j)) << "\" stroke=\"#ccc\"/>\n";
        }
        svg << "<text x=\"" << fmt2(kMarginLeft - 6.0) << "\" y=\""
            << fmt2(kMarginTop + (i + 0.5) * cell_h + 4.0) << "\" text-anchor=\"end\">"
            << xml_escape(row_labels[static_cast<std::size_t>(i)]) << "</text>\n";
    }
    for (Eigen::Index j = 0; j < nc; ++j) {
        svg << "<text x=\"" << fmt2(kMarginLeft + (j + 0.5) * cell_w) << "\" y=\""
            << fmt2(kHeight - kMarginBottom + 16.0) << "\" text-anchor=\"middle\">"
            << xml_escape(col_labels[static_cast<std::size_t>(j)]) << "</text>\n";
    }
    svg << "</svg>\n";
}

ScatterFitResult emit_scatter_fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                  const std::vector<std::string>& point_labels,
                                  const std::string& path_stem, const std::string& title,
                                  const std::string& x_label, const std::string& y_label) {
    if (x.size() != y.size() || x.size() < 2)
        throw ValidationError("scatter: need >= 2 paired points");
    if (!point_labels.empty() && static_cast<Eigen::Index>(point_labels.size()) != x.size())
        throw ValidationError("scatter: label count mismatch");

    ScatterFitResult fit;
    const double mx = x.mean();
    const double sxx = (x.array() - mx).square().sum();
    if (sxx > 0.0) {
        fit.has_fit = true;
        fit.slope = (x.array() - mx).cwiseProduct(y.array() - y.mean()).sum() / sxx;
        fit.intercept = y.mean() - fit.slope * mx;
    }

    {
        auto csv = open_file(path_stem + ".csv");
        csv << "label,x,y\n";
        for (Eigen::Index i = 0; i < x.size(); ++i)
            csv << (point_labels.empty() ? std::to_string(i)
                                         : point_labels[static_cast<std::size_t>(i)])
                << ',' << format_double(x(i)) << ',' << format_double(y(i)) << '\n';
        if (fit.has_fit)
            csv << "#fit," << format_double(fit.slope) << ',' << format_double(fit.intercept)
                << '\n';
        else
            csv << "#warning,all x identical; no fit line,\n";
    }

    auto svg = open_file(path_stem + ".svg");
    svg_header(svg, title);
    const Axis ax = make_axis(x.minCoeff(), x.maxCoeff(), kMarginLeft, kWidth - kMarginRight);
    const Axis ay = make_axis(y.minCoeff(), y.maxCoeff(), kHeight - kMarginBottom, kMarginTop);
    svg << "<line x1=\"" << fmt2(kMarginLeft) << "\" y1=\"" << fmt2(kHeight - kMarginBottom)
        << "\" x2=\"" << fmt2(kWidth - kMarginRight) << "\" y2=\""
        << fmt2(kHeight - kMarginBottom) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << fmt2(kMarginLeft) << "\" y1=\"" << fmt2(kMarginTop) << "\" x2=\""
        << fmt2(kMarginLeft) << "\" y2=\"" << fmt2(kHeight - kMarginBottom)
        << "\" stroke=\"black\"/>\n";
    if (fit.has_fit) {
        const double y0 = fit.slope * ax.lo + fit.intercept;
        const double y1 = fit.slope * ax.hi + fit.intercept;
        svg << "<line x1=\"" << fmt2(ax.to_pix(ax.lo)) << "\" y1=\"" << fmt2(ay.to_pix(y0))
            << "\" x2=\"" << fmt2(ax.to_pix(ax.hi)) << "\" y2=\"" << fmt2(ay.to_pix(y1))
            << "\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n";
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        svg << "<circle cx=\"" << fmt2(ax.to_pix(x(i))) << "\" cy=\"" << fmt2(ay.to_pix(y(i)))
            << "\" r=\"4\" fill=\"rgb(33,102,172)\"/>\n";
        if (!point_labels.empty())
            svg << "<text x=\"" << fmt2(ax.to_pix(x(i)) + 6.0) << "\" y=\""
                << fmt2(ay.to_pix(y(i)) - 6.0) << "\">"
                << xml_escape(point_labels[static_cast<std::size_t>(i)]) << "</text>\n";
    }
    svg << "<text x=\"" << fmt2((kMarginLeft + kWidth - kMarginRight) / 2.0) << "\" y=\""
        << fmt2(kHeight - 20.0) << "\" text-anchor=\"middle\">" << xml_escape(x_label)
        << "</text>\n";
    svg << "<text x=\"20\" y=\"" << fmt2((kMarginTop + kHeight - kMarginBottom) / 2.0)
        << "\" transform=\"rotate(-90 20 " << fmt2((kMarginTop + kHeight - kMarginBottom) / 2.0)
        << ")\" text-anchor=\"middle\">" << xml_escape(y_label) << "</text>\n";
    svg << "</svg>\n";
    return fit;
}

void emit_line_pair(const Eigen::VectorXd& series_a, const std::string& label_a,
                    const Eigen::VectorXd& series_b, const std::string& label_b,
                    const std::vector<std::string>& x_labels, const std::string& path_stem,
                    const std::string& title) {
    if (series_a.size() != series_b.size())
        throw ValidationError("line pair: series length mismatch");
    if (series_a.size() < 2) throw ValidationError("line pair: need >= 2 points");
    if (static_cast<Eigen::Index>(x_labels.size()) != series_a.size())
        throw ValidationError("line pair: x label count mismatch");

    {
        auto csv = open_file(path_stem + ".csv");
        csv << "x," << label_a << ',' << label_b << '\n';
        for (Eigen::Index i = 0; i < series_a.size(); ++i)
            csv << x_labels[static_cast<std::size_t>(i)] << ',' << format_double(series_a(i))
                << ',' << format_double(series_b(i)) << '\n';
    }

    auto svg = open_file(path_stem + ".svg");
    svg_header(svg, title);
    const double lo = std::min(series_a.minCoeff(), series_b.minCoeff());
    const double hi = std::max(series_a.maxCoeff(), series_b.maxCoeff());
    const Axis ay = make_axis(lo, hi, kHeight - kMarginBottom, kMarginTop);
    const Eigen::Index n = series_a.size();
    auto x_pix = [&](Eigen::Index i) {
        return kMarginLeft + (kWidth - kMarginLeft - kMarginRight) * static_cast<double>(i) /
                                 static_cast<double>(n - 1);
    };
    auto polyline = [&](const Eigen::VectorXd& s, const char* color) {
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (Eigen::Index i = 0; i < n; ++i) {
            if (i) svg << ' ';
            svg << fmt2(x_pix(i)) << ',' << fmt2(ay.to_pix(s(i)));
        }
        svg << "\"/>\n";
    };
    polyline(series_a, "rgb(33,102,172)");
    polyline(series_b, "rgb(178,24,43)");
    for (Eigen::Index i = 0; i < n; ++i)
        svg << "<text x=\"" << fmt2(x_pix(i)) << "\" y=\"" << fmt2(kHeight - kMarginBottom + 16.0)
            << "\" text-anchor=\"middle\">" << xml_escape(x_labels[static_cast<std::size_t>(i)])
            << "</text>\n";
    svg << "<rect x=\"650\" y=\"40\" width=\"12\" height=\"12\" fill=\"rgb(33,102,172)\"/>\n"
        << "<text x=\"668\" y=\"50\">" << xml_escape(label_a) << "</text>\n"
        << "<rect x=\"650\" y=\"60\" width=\"12\" height=\"12\" fill=\"rgb(178,24,43)\"/>\n"
        << "<text x=\"668\" y=\"70\">" << xml_escape(label_b) << "</text>\n";
    svg << "</svg>\n";
}

}  // namespace xai

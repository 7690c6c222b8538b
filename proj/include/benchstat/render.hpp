#pragma once

// Hand-emitted SVG artifacts: the Demsar critical-difference diagram and
// the per-task mean +- CI panel. Output is byte-deterministic: no
// timestamps, random ids, or environment-dependent bytes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "benchstat/ranking.hpp"
#include "benchstat/report.hpp"

namespace benchstat {

struct CdSvgOptions {
    double scale = 12.0;   // pixels per rank unit = 10 * scale
    int cd_precision = 2;  // decimals on the CD ruler label
};

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline std::string fmt(double v, int precision) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

}  // namespace detail

// Demsar CD diagram: rank axis with integer ticks on [1, k] (left = rank 1,
// better), one marker+label per model at its mean rank, a CD ruler, and one
// horizontal bar per clique. Labels alternate two stagger heights in rank
// order.
inline std::string render_cd_svg(const CdResult& cd,
                                 const CdSvgOptions& options = {}) {
    const double ppr = 10.0 * options.scale;
    const double margin = 50.0;
    const int k = cd.k;
    const double axis_y = 110.0;
    const double ruler_y = 30.0;
    const auto x_of = [&](double rank) { return margin + (rank - 1.0) * ppr; };

    const std::size_t n_cliques = cd.cliques.size();
    const double height = axis_y + 40.0 + 14.0 * double(n_cliques) + 20.0;
    const double width = margin * 2.0 + ppr * double(k - 1);

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
        << detail::fmt(width, 1) << "\" height=\"" << detail::fmt(height, 1)
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";

    // axis and integer ticks
    svg << "<line class=\"axis\" x1=\"" << detail::fmt(x_of(1.0)) << "\" y1=\""
        << detail::fmt(axis_y) << "\" x2=\"" << detail::fmt(x_of(double(k)))
        << "\" y2=\"" << detail::fmt(axis_y) << "\" stroke=\"black\"/>\n";
    for (int r = 1; r <= k; ++r) {
        const double x = x_of(double(r));
        svg << "<line class=\"tick\" x1=\"" << detail::fmt(x) << "\" y1=\""
            << detail::fmt(axis_y) << "\" x2=\"" << detail::fmt(x) << "\" y2=\""
            << detail::fmt(axis_y + 6.0) << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << detail::fmt(x) << "\" y=\""
            << detail::fmt(axis_y + 18.0) << "\" text-anchor=\"middle\">" << r
            << "</text>\n";
    }

    // CD ruler anchored at rank 1
    const double rx0 = x_of(1.0);
    const double rx1 = x_of(1.0 + cd.cd);
    svg << "<line class=\"cd-ruler\" x1=\"" << detail::fmt(rx0) << "\" y1=\""
        << detail::fmt(ruler_y) << "\" x2=\"" << detail::fmt(rx1) << "\" y2=\""
        << detail::fmt(ruler_y) << "\" stroke=\"black\"/>\n";
    for (const double rx : {rx0, rx1}) {
        svg << "<line x1=\"" << detail::fmt(rx) << "\" y1=\""
            << detail::fmt(ruler_y - 4.0) << "\" x2=\"" << detail::fmt(rx)
            << "\" y2=\"" << detail::fmt(ruler_y + 4.0)
            << "\" stroke=\"black\"/>\n";
    }
    svg << "<text class=\"cd-label\" x=\"" << detail::fmt((rx0 + rx1) / 2.0)
        << "\" y=\"" << detail::fmt(ruler_y - 8.0)
        << "\" text-anchor=\"middle\">CD_" << cd.alpha << " = "
        << detail::fmt(cd.cd, options.cd_precision) << "</text>\n";

    // markers with labels staggered on two heights in rank order
    std::vector<int> rank_order(cd.models.size());
    for (std::size_t i = 0; i < rank_order.size(); ++i) {
        rank_order[i] = static_cast<int>(i);
    }
    std::sort(rank_order.begin(), rank_order.end(), [&](int a, int b) {
        return cd.mean_ranks[a] < cd.mean_ranks[b];
    });
    std::vector<double> label_y(cd.models.size(), 0.0);
    for (std::size_t pos = 0; pos < rank_order.size(); ++pos) {
        label_y[rank_order[pos]] = pos % 2 == 0 ? axis_y - 42.0 : axis_y - 24.0;
    }
    for (std::size_t i = 0; i < cd.models.size(); ++i) {
        const double x = x_of(cd.mean_ranks[i]);
        svg << "<circle class=\"marker\" cx=\"" << detail::fmt(x) << "\" cy=\""
            << detail::fmt(axis_y) << "\" r=\"3\"/>\n"
            << "<line x1=\"" << detail::fmt(x) << "\" y1=\""
            << detail::fmt(axis_y - 4.0) << "\" x2=\"" << detail::fmt(x)
            << "\" y2=\"" << detail::fmt(label_y[i] + 4.0)
            << "\" stroke=\"grey\" stroke-dasharray=\"2,2\"/>\n"
            << "<text class=\"model-label\" x=\"" << detail::fmt(x) << "\" y=\""
            << detail::fmt(label_y[i]) << "\" text-anchor=\"middle\">"
            << cd.models[i] << " (" << detail::fmt(cd.mean_ranks[i], 2)
            << ")</text>\n";
    }

    // clique bars below the axis
    for (std::size_t c = 0; c < cd.cliques.size(); ++c) {
        double lo = 1e300;
        double hi = -1e300;
        for (const int idx : cd.cliques[c]) {
            lo = std::min(lo, cd.mean_ranks[idx]);
            hi = std::max(hi, cd.mean_ranks[idx]);
        }
        const double y = axis_y + 32.0 + 14.0 * double(c);
        svg << "<line class=\"clique\" x1=\"" << detail::fmt(x_of(lo) - 5.0)
            << "\" y1=\"" << detail::fmt(y) << "\" x2=\""
            << detail::fmt(x_of(hi) + 5.0) << "\" y2=\"" << detail::fmt(y)
            << "\" stroke=\"black\" stroke-width=\"3\"/>\n";
    }

    svg << "</svg>\n";
    return svg.str();
}

// Per-task mean +- CI panel: one bar per present model with error whiskers
// at mean +- h; the winner bar carries an emphasis class.
inline std::string render_cells_svg(std::span<const SummaryRow> rows) {
    std::vector<const SummaryRow*> present;
    for (const auto& r : rows) {
        if (r.mark != CellMark::Incompatible) present.push_back(&r);
    }
    if (present.empty()) {
        throw std::invalid_argument("render_cells_svg: no rows to draw");
    }

    double lo = 1e300;
    double hi = -1e300;
    for (const auto* r : present) {
        lo = std::min(lo, r->mean - r->halfwidth);
        hi = std::max(hi, r->mean + r->halfwidth);
    }
    if (lo > 0.0) lo = std::min(lo, 0.0);  // bars grow from zero when sensible
    if (hi == lo) hi = lo + 1.0;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    const double plot_w = 80.0 * double(present.size());
    const double plot_h = 180.0;
    const double margin = 50.0;
    const double width = margin * 2.0 + plot_w;
    const double height = margin * 2.0 + plot_h;
    const auto y_of = [&](double v) {
        return margin + plot_h * (1.0 - (v - lo) / (hi - lo));
    };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
        << detail::fmt(width, 1) << "\" height=\"" << detail::fmt(height, 1)
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    // axes
    svg << "<line x1=\"" << detail::fmt(margin) << "\" y1=\""
        << detail::fmt(margin) << "\" x2=\"" << detail::fmt(margin) << "\" y2=\""
        << detail::fmt(margin + plot_h) << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << detail::fmt(margin) << "\" y1=\""
        << detail::fmt(margin + plot_h) << "\" x2=\""
        << detail::fmt(margin + plot_w) << "\" y2=\""
        << detail::fmt(margin + plot_h) << "\" stroke=\"black\"/>\n";

    const double baseline = y_of(std::max(lo, 0.0));
    for (std::size_t i = 0; i < present.size(); ++i) {
        const SummaryRow& r = *present[i];
        const double xc = margin + 80.0 * (double(i) + 0.5);
        const double bar_w = 40.0;
        const double y_top = std::min(y_of(r.mean), baseline);
        const double bar_h = std::fabs(baseline - y_of(r.mean));
        svg << "<rect class=\"bar"
            << (r.mark == CellMark::Winner ? " winner" : "") << "\" x=\""
            << detail::fmt(xc - bar_w / 2.0) << "\" y=\"" << detail::fmt(y_top)
            << "\" width=\"" << detail::fmt(bar_w) << "\" height=\""
            << detail::fmt(bar_h) << "\" fill=\""
            << (r.mark == CellMark::Winner ? "#c9b458" : "#b8cce4")
            << "\" stroke=\"black\"/>\n";
        const double y_lo = y_of(r.mean - r.halfwidth);
        const double y_hi = y_of(r.mean + r.halfwidth);
        if (r.halfwidth > 0.0) {
            svg << "<line class=\"whisker\" x1=\"" << detail::fmt(xc)
                << "\" y1=\"" << detail::fmt(y_lo) << "\" x2=\""
                << detail::fmt(xc) << "\" y2=\"" << detail::fmt(y_hi)
                << "\" stroke=\"black\"/>\n";
        }
        for (const double yw : {y_lo, y_hi}) {
            svg << "<line x1=\"" << detail::fmt(xc - 8.0) << "\" y1=\""
                << detail::fmt(yw) << "\" x2=\"" << detail::fmt(xc + 8.0)
                << "\" y2=\"" << detail::fmt(yw) << "\" stroke=\"black\"/>\n";
            if (r.halfwidth == 0.0) break;  // degenerate whisker = single tick
        }
        svg << "<text x=\"" << detail::fmt(xc) << "\" y=\""
            << detail::fmt(margin + plot_h + 16.0)
            << "\" text-anchor=\"middle\">" << r.model << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace benchstat

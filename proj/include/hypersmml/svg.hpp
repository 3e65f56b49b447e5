#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "hypersmml/hyperbolic.hpp"
#include "hypersmml/smml.hpp"

namespace hypersmml {

namespace svg_detail {

struct P2 {
    double x = 0.0, y = 0.0;
};

using Loop = std::vector<P2>;

/// Closed zero-contours of a scalar field sampled on a node grid, for the
/// region {f >= 0}. The grid is padded with one negative ghost ring so
/// regions touching the box close along its boundary; ghost crossings are
/// clamped back onto the box.
class ContourGrid {
public:
    ContourGrid(const std::function<double(double, double)>& f, double x0, double x1, double y0,
                double y1, int nodes)
        : x0_(x0), x1_(x1), y0_(y0), y1_(y1), nodes_(nodes) {
        const double hx = (x1 - x0) / (nodes - 1);
        const double hy = (y1 - y0) / (nodes - 1);
        xs_.resize(nodes + 2);
        ys_.resize(nodes + 2);
        for (int i = 0; i < nodes + 2; ++i) {
            xs_[i] = x0 + (i - 1) * hx;
            ys_[i] = y0 + (i - 1) * hy;
        }
        values_.assign((nodes + 2) * (nodes + 2), -1.0);
        for (int i = 1; i <= nodes; ++i)
            for (int j = 1; j <= nodes; ++j) values_[idx(i, j)] = f(xs_[i], ys_[j]);
    }

    /// Largest closed loop of the region boundary (by enclosed area).
    Loop largest_loop() const {
        std::vector<std::pair<P2, P2>> segments;
        for (int i = 0; i + 1 < nodes_ + 2; ++i)
            for (int j = 0; j + 1 < nodes_ + 2; ++j) emit_cell(i, j, segments);
        return link_largest(segments);
    }

private:
    int idx(int i, int j) const { return i * (nodes_ + 2) + j; }

    P2 lerp(int i0, int j0, int i1, int j1) const {
        const double fa = values_[idx(i0, j0)], fb = values_[idx(i1, j1)];
        const double t = fa / (fa - fb);
        P2 p{xs_[i0] + t * (xs_[i1] - xs_[i0]), ys_[j0] + t * (ys_[j1] - ys_[j0])};
        p.x = std::clamp(p.x, x0_, x1_);
        p.y = std::clamp(p.y, y0_, y1_);
        return p;
    }

    void emit_cell(int i, int j, std::vector<std::pair<P2, P2>>& out) const {
        const bool bl = values_[idx(i, j)] >= 0.0;
        const bool br = values_[idx(i + 1, j)] >= 0.0;
        const bool tr = values_[idx(i + 1, j + 1)] >= 0.0;
        const bool tl = values_[idx(i, j + 1)] >= 0.0;
        const int code = bl + 2 * br + 4 * tr + 8 * tl;
        if (code == 0 || code == 15) return;
        const auto bottom = [&] { return lerp(i, j, i + 1, j); };
        const auto right = [&] { return lerp(i + 1, j, i + 1, j + 1); };
        const auto top = [&] { return lerp(i, j + 1, i + 1, j + 1); };
        const auto left = [&] { return lerp(i, j, i, j + 1); };
        const double center = 0.25
                              * (values_[idx(i, j)] + values_[idx(i + 1, j)]
                                 + values_[idx(i + 1, j + 1)] + values_[idx(i, j + 1)]);
        switch (code) {
            case 1: out.emplace_back(bottom(), left()); break;
            case 2: out.emplace_back(bottom(), right()); break;
            case 3: out.emplace_back(left(), right()); break;
            case 4: out.emplace_back(right(), top()); break;
            case 5:
                if (center >= 0.0) {
                    out.emplace_back(left(), top());
                    out.emplace_back(bottom(), right());
                } else {
                    out.emplace_back(bottom(), left());
                    out.emplace_back(right(), top());
                }
                break;
            case 6: out.emplace_back(bottom(), top()); break;
            case 7: out.emplace_back(left(), top()); break;
            case 8: out.emplace_back(left(), top()); break;
            case 9: out.emplace_back(bottom(), top()); break;
            case 10:
                if (center >= 0.0) {
                    out.emplace_back(bottom(), left());
                    out.emplace_back(right(), top());
                } else {
                    out.emplace_back(bottom(), right());
                    out.emplace_back(left(), top());
                }
                break;
            case 11: out.emplace_back(right(), top()); break;
            case 12: out.emplace_back(left(), right()); break;
            case 13: out.emplace_back(bottom(), right()); break;
            case 14: out.emplace_back(bottom(), left()); break;
            default: break;
        }
    }

    static Loop link_largest(const std::vector<std::pair<P2, P2>>& segments) {
        using Key = std::pair<double, double>;
        std::map<Key, std::vector<std::size_t>> at;
        for (std::size_t s = 0; s < segments.size(); ++s) {
            at[{segments[s].first.x, segments[s].first.y}].push_back(s);
            at[{segments[s].second.x, segments[s].second.y}].push_back(s);
        }
        std::vector<bool> used(segments.size(), false);
        Loop best;
        double best_area = -1.0;
        for (std::size_t start = 0; start < segments.size(); ++start) {
            if (used[start]) continue;
            Loop loop;
            used[start] = true;
            loop.push_back(segments[start].first);
            P2 cursor = segments[start].second;
            while (true) {
                loop.push_back(cursor);
                const auto it = at.find({cursor.x, cursor.y});
                std::size_t next = segments.size();
                if (it != at.end())
                    for (std::size_t s : it->second)
                        if (!used[s]) {
                            next = s;
                            break;
                        }
                if (next == segments.size()) break;
                used[next] = true;
                const P2& a = segments[next].first;
                cursor = (a.x == cursor.x && a.y == cursor.y) ? segments[next].second : a;
            }
            double area = 0.0;
            for (std::size_t k = 0; k < loop.size(); ++k) {
                const P2& a = loop[k];
                const P2& b = loop[(k + 1) % loop.size()];
                area += a.x * b.y - b.x * a.y;
            }
            area = std::abs(area) * 0.5;
            if (area > best_area) {
                best_area = area;
                best = std::move(loop);
            }
        }
        return best;
    }

    double x0_, x1_, y0_, y1_;
    int nodes_;
    std::vector<double> xs_, ys_, values_;
};

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

/// Evenly spaced fill colors.
inline std::string cell_color(int i, int m) {
    const double hue = 360.0 * i / std::max(m, 1);
    const double s = 0.55, l = 0.62;
    const auto channel = [&](double t) {
        if (t < 0.0) t += 1.0;
        if (t > 1.0) t -= 1.0;
        const double q = l < 0.5 ? l * (1.0 + s) : l + s - l * s;
        const double pq = 2.0 * l - q;
        double c;
        if (t < 1.0 / 6.0) c = pq + (q - pq) * 6.0 * t;
        else if (t < 0.5) c = q;
        else if (t < 2.0 / 3.0) c = pq + (q - pq) * (2.0 / 3.0 - t) * 6.0;
        else c = pq;
        return static_cast<int>(std::lround(255.0 * c));
    };
    const double h = hue / 360.0;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", channel(h + 1.0 / 3.0), channel(h),
                  channel(h - 1.0 / 3.0));
    return buf;
}

/// World-to-canvas transform with a uniform scale and flipped y.
struct Canvas {
    double xmin, xmax, ymin, ymax;
    double scale = 1.0;
    double width = 0.0, height = 0.0;
    static constexpr double pad = 24.0;

    Canvas(double x0, double x1, double y0, double y1, double target_width = 720.0)
        : xmin(x0), xmax(x1), ymin(y0), ymax(y1) {
        scale = (target_width - 2.0 * pad) / (xmax - xmin);
        height = std::clamp((ymax - ymin) * scale + 2.0 * pad, 160.0, 1200.0);
        scale = std::min(scale, (height - 2.0 * pad) / (ymax - ymin));
        width = (xmax - xmin) * scale + 2.0 * pad;
    }

    P2 map(const P2& w) const {
        return {pad + (w.x - xmin) * scale, height - pad - (w.y - ymin) * scale};
    }

    std::string path(const Loop& loop, bool close = true) const {
        std::string d;
        for (std::size_t k = 0; k < loop.size(); ++k) {
            const P2 q = map(loop[k]);
            d += (k == 0 ? "M" : " L");
            d += fmt(q.x) + " " + fmt(q.y);
        }
        if (close && !loop.empty()) d += " Z";
        return d;
    }
};

}  // namespace svg_detail

enum class PlotView { Affine, Hyperbolic };

/// Render a fitted p = 1 code as an SVG drawing. The affine view shows the
/// partition of the data space clipped to the domain image with the parabola
/// boundary; the hyperbolic view shows its image in the upper half-plane with
/// the cell boundaries drawn as vertical lines or semicircles and the
/// assertions marked. Cell regions are emitted as exactly one path per cell
/// with class "cell".
inline std::string render_code_svg(const SmmlCode& code, int n, PlotView view) {
    using svg_detail::Canvas;
    using svg_detail::ContourGrid;
    using svg_detail::Loop;
    using svg_detail::P2;
    validate_code(code);
    const int p = code.assertions[0].p();
    if (p != 1) throw std::invalid_argument("render_code_svg: only p = 1 codes can be drawn");

    const TruncatedDomain& dom = code.domain;
    const double u_lo = dom.lower[0], u_hi = dom.upper[0];
    const double h_lo = dom.lower[1], h_hi = dom.upper[1];
    const std::vector<double> offsets = detail::lambda_offsets(code, n);

    // membership margin of cell i at box point u, positive inside the cell
    const auto margin = [&](int i, double u1, double u2) {
        if (code.m == 1) return 1.0;
        VectorXd x(2);
        x << u1, u1 * u1 + 0.5 * u2 * u2;
        const double li = offsets[i] - x.dot(code.assertions[i].v);
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < code.m; ++j) {
            if (j == i) continue;
            best = std::min(best, offsets[j] - x.dot(code.assertions[j].v));
        }
        return best - li;
    };

    const int nodes = 257;
    std::vector<Loop> cell_loops(code.m);
    for (int i = 0; i < code.m; ++i) {
        const ContourGrid grid([&](double a, double b) { return margin(i, a, b); }, u_lo, u_hi,
                               h_lo, h_hi, nodes);
        cell_loops[i] = grid.largest_loop();
    }

    // map the u-space loops into the coordinates of the requested view
    const auto map_point = [&](const P2& q) {
        if (view == PlotView::Affine) return P2{q.x, q.x * q.x + 0.5 * q.y * q.y};
        return P2{q.x, q.y / std::numbers::sqrt2};
    };
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (auto& loop : cell_loops) {
        for (auto& q : loop) {
            q = map_point(q);
            xmin = std::min(xmin, q.x);
            xmax = std::max(xmax, q.x);
            ymin = std::min(ymin, q.y);
            ymax = std::max(ymax, q.y);
        }
    }
    if (view == PlotView::Affine) ymin = std::min(ymin, 0.0);
    const double margin_x = 0.05 * (xmax - xmin), margin_y = 0.05 * (ymax - ymin);
    const Canvas canvas(xmin - margin_x, xmax + margin_x, ymin - margin_y, ymax + margin_y);

    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_detail::fmt(canvas.width)
         + "\" height=\"" + svg_detail::fmt(canvas.height) + "\" viewBox=\"0 0 "
         + svg_detail::fmt(canvas.width) + " " + svg_detail::fmt(canvas.height) + "\">\n";
    s += "  <rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

    for (int i = 0; i < code.m; ++i) {
        s += "  <path class=\"cell\" d=\"" + canvas.path(cell_loops[i]) + "\" fill=\""
             + svg_detail::cell_color(i, code.m)
             + "\" fill-opacity=\"0.55\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    }

    if (view == PlotView::Affine) {
        // parabola boundary of the data space
        Loop parabola;
        for (int k = 0; k <= 256; ++k) {
            const double x1 = xmin + (xmax - xmin) * k / 256.0;
            parabola.push_back({x1, x1 * x1});
        }
        s += "  <path class=\"parabola\" d=\"" + canvas.path(parabola, false)
             + "\" fill=\"none\" stroke=\"#990000\" stroke-width=\"1.5\" "
               "stroke-dasharray=\"6 4\"/>\n";
    } else {
        // facet planes: vertical lines or semicircles in the half-plane
        for (const Facet& f : code_facets(code, n)) {
            if (!f.plane) continue;
            if (std::holds_alternative<VerticalPlane>(*f.plane)) {
                const auto& vp = std::get<VerticalPlane>(*f.plane);
                const double x1 = vp.d / vp.c[0];
                Loop line{{x1, std::max(ymin, 1e-9)}, {x1, ymax}};
                s += "  <path class=\"facet\" d=\"" + canvas.path(line, false)
                     + "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n";
            } else {
                const auto& sp = std::get<SpherePlane>(*f.plane);
                Loop arc;
                for (int k = 0; k <= 180; ++k) {
                    const double phi = std::numbers::pi * k / 180.0;
                    const P2 q{sp.c[0] + sp.radius * std::cos(phi), sp.radius * std::sin(phi)};
                    if (q.y >= std::max(ymin, 0.0) && q.y <= ymax && q.x >= xmin && q.x <= xmax)
                        arc.push_back(q);
                }
                if (arc.size() > 1)
                    s += "  <path class=\"facet\" d=\"" + canvas.path(arc, false)
                         + "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n";
            }
        }
        // assertions at their (translated) upper half-plane positions
        for (int i = 0; i < code.m; ++i) {
            const UpperHalfParam u = horomap_uh(theta_to_u(code.assertions[i], n));
            const svg_detail::P2 q = canvas.map({u.v[0], u.v[1]});
            s += "  <circle class=\"assertion\" cx=\"" + svg_detail::fmt(q.x) + "\" cy=\""
                 + svg_detail::fmt(q.y) + "\" r=\"4\" fill=\"#000000\"/>\n";
        }
    }
    s += "</svg>\n";
    return s;
}

}  // namespace hypersmml

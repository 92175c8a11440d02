#pragma once

#include "core.hpp"

#include <vector>

namespace currentkit {

/// Axis-aligned box [lower, upper] in R^n.
struct Box {
    Vec lower;
    Vec upper;

    Box() = default;
    Box(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi))
    {
        if (lower.size() != upper.size()) throw Error("box corners differ in dimension");
        for (Eigen::Index i = 0; i < lower.size(); ++i)
            if (!(lower[i] < upper[i])) throw Error("box lower corner must be below upper corner");
    }

    static Box cube(int n, double lo, double hi) { return Box(Vec::Constant(n, lo), Vec::Constant(n, hi)); }

    int dim() const { return static_cast<int>(lower.size()); }
    double diameter() const { return (upper - lower).norm(); }
    Vec center() const { return 0.5 * (lower + upper); }

    bool contains(const Vec& x, double tol = 0.0) const
    {
        for (Eigen::Index i = 0; i < lower.size(); ++i)
            if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
        return true;
    }

    bool contains(const Box& b) const { return contains(b.lower) && contains(b.upper); }

    Box inflated(double margin) const
    {
        return Box(lower.array() - margin, upper.array() + margin);
    }

    /// Smallest box containing the points (columns or list), optionally padded.
    static Box bounding(const std::vector<Vec>& pts, double pad = 0.0)
    {
        if (pts.empty()) throw Error("bounding box of an empty point set");
        Vec lo = pts.front(), hi = pts.front();
        for (const auto& p : pts) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        for (Eigen::Index i = 0; i < lo.size(); ++i) {
            if (hi[i] - lo[i] < 1e-12) {
                lo[i] -= 0.5;
                hi[i] += 0.5;
            }
        }
        return Box(lo.array() - pad, hi.array() + pad);
    }
};

/// Tensor grid over a box with `resolution` points per axis (endpoints included).
/// Dyadic resolutions 2^k + 1 give nested grids.
inline std::vector<Vec> grid_points(const Box& k, int resolution)
{
    if (resolution < 2) throw Error("grid needs at least 2 points per axis");
    const int n = k.dim();
    std::vector<Vec> pts;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    while (true) {
        Vec x(n);
        for (int i = 0; i < n; ++i)
            x[i] = k.lower[i] + (k.upper[i] - k.lower[i]) * idx[static_cast<std::size_t>(i)] / (resolution - 1);
        pts.push_back(x);
        int i = n - 1;
        while (i >= 0 && ++idx[static_cast<std::size_t>(i)] == resolution) idx[static_cast<std::size_t>(i--)] = 0;
        if (i < 0) break;
    }
    return pts;
}

/// Index pairs of grid points that differ by one step along one axis.
inline std::vector<std::pair<std::size_t, std::size_t>> grid_neighbor_pairs(int n, int resolution)
{
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) total *= static_cast<std::size_t>(resolution);
    for (std::size_t p = 0; p < total; ++p) {
        std::size_t stride = 1;
        for (int axis = n - 1; axis >= 0; --axis) {
            std::size_t coord = (p / stride) % static_cast<std::size_t>(resolution);
            if (coord + 1 < static_cast<std::size_t>(resolution)) out.emplace_back(p, p + stride);
            stride *= static_cast<std::size_t>(resolution);
        }
    }
    return out;
}

} // namespace currentkit

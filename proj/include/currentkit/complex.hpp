#pragma once

#include "chain.hpp"

#include <map>

namespace currentkit {

/// Simplicial complex generated by a list of top simplices. Every simplex is
/// stored with increasing vertex indices, which fixes its orientation.
class SimplicialComplex {
public:
    SimplicialComplex() = default;

    static SimplicialComplex from_tops(std::vector<Vec> vertices, const std::vector<std::vector<int>>& tops)
    {
        if (vertices.empty()) throw Error("complex needs vertices");
        SimplicialComplex x;
        x.ambient_ = static_cast<int>(vertices.front().size());
        x.vertices_ = std::move(vertices);
        int top = -1;
        for (const auto& s : tops) top = std::max(top, static_cast<int>(s.size()) - 1);
        x.top_ = std::max(top, 0);
        x.by_degree_.resize(static_cast<std::size_t>(x.top_) + 1);
        x.index_.resize(static_cast<std::size_t>(x.top_) + 1);
        for (std::size_t v = 0; v < x.vertices_.size(); ++v) x.insert({static_cast<int>(v)});
        for (auto s : tops) {
            std::sort(s.begin(), s.end());
            const int k = static_cast<int>(s.size());
            // All nonempty subsets of the top simplex.
            for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
                std::vector<int> face;
                for (int i = 0; i < k; ++i)
                    if (mask & (1u << i)) face.push_back(s[static_cast<std::size_t>(i)]);
                x.insert(face);
            }
        }
        return x;
    }

    /// Kuhn/Freudenthal triangulation of a box with `resolution` cells per axis.
    static SimplicialComplex freudenthal(const Box& box, int resolution)
    {
        if (resolution < 1) throw Error("complex resolution must be >= 1");
        const int n = box.dim();
        std::vector<Vec> verts = grid_points(box, resolution + 1);
        auto vid = [&](const std::vector<int>& c) {
            int id = 0;
            for (int i = 0; i < n; ++i) id = id * (resolution + 1) + c[static_cast<std::size_t>(i)];
            return id;
        };
        std::vector<std::vector<int>> tops;
        std::vector<int> cell(static_cast<std::size_t>(n), 0), perm(static_cast<std::size_t>(n));
        while (true) {
            std::iota(perm.begin(), perm.end(), 0);
            do {
                std::vector<int> c = cell;
                std::vector<int> s{vid(c)};
                for (int k = 0; k < n; ++k) {
                    ++c[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])];
                    s.push_back(vid(c));
                }
                tops.push_back(std::move(s));
            } while (std::next_permutation(perm.begin(), perm.end()));
            int i = n - 1;
            while (i >= 0 && ++cell[static_cast<std::size_t>(i)] == resolution) cell[static_cast<std::size_t>(i--)] = 0;
            if (i < 0) break;
        }
        return from_tops(std::move(verts), tops);
    }

    int ambient() const { return ambient_; }
    int top_degree() const { return top_; }
    const std::vector<Vec>& vertices() const { return vertices_; }

    const std::vector<std::vector<int>>& simplices(int degree) const
    {
        static const std::vector<std::vector<int>> none;
        if (degree < 0 || degree > top_) return none;
        return by_degree_[static_cast<std::size_t>(degree)];
    }

    int find(const std::vector<int>& sorted) const
    {
        const int d = static_cast<int>(sorted.size()) - 1;
        if (d < 0 || d > top_) return -1;
        const auto& idx = index_[static_cast<std::size_t>(d)];
        auto it = idx.find(sorted);
        return it == idx.end() ? -1 : it->second;
    }

    std::vector<Vec> points(const std::vector<int>& s) const
    {
        std::vector<Vec> pts;
        for (int i : s) pts.push_back(vertices_[static_cast<std::size_t>(i)]);
        return pts;
    }

    double volume(int degree, std::size_t i) const { return simplex_volume(points(simplices(degree)[i])); }

    Vec volumes(int degree) const
    {
        const auto& s = simplices(degree);
        Vec v(static_cast<Eigen::Index>(s.size()));
        for (std::size_t i = 0; i < s.size(); ++i) v[static_cast<Eigen::Index>(i)] = volume(degree, i);
        return v;
    }

    /// Signed incidence of r-faces (rows) in the boundaries of (r+1)-simplices (columns).
    Mat boundary_matrix(int r) const
    {
        const auto& faces = simplices(r);
        const auto& cells = simplices(r + 1);
        Mat b = Mat::Zero(static_cast<Eigen::Index>(faces.size()), static_cast<Eigen::Index>(cells.size()));
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const auto& c = cells[j];
            for (std::size_t k = 0; k < c.size(); ++k) {
                std::vector<int> f;
                for (std::size_t q = 0; q < c.size(); ++q)
                    if (q != k) f.push_back(c[q]);
                b(find(f), static_cast<Eigen::Index>(j)) = (k % 2 == 0) ? 1.0 : -1.0;
            }
        }
        return b;
    }

    /// Index of the complex vertex within `tol` of p, or -1.
    int locate_vertex(const Vec& p, double tol) const
    {
        int best = -1;
        double bd = tol;
        for (std::size_t i = 0; i < vertices_.size(); ++i) {
            double d = (vertices_[i] - p).norm();
            if (d <= bd) {
                bd = d;
                best = static_cast<int>(i);
            }
        }
        return best;
    }

    /// Coefficients of an r-chain on the r-simplices of the complex. Throws
    /// DomainError when the chain is not supported on the complex.
    Vec coefficients(const Chain& t) const
    {
        const int r = t.degree();
        if (t.ambient() != ambient_) throw DegreeError("chain and complex ambient dimensions differ");
        Vec c = Vec::Zero(static_cast<Eigen::Index>(simplices(r).size()));
        if (t.empty()) return c;
        double scale = 0.0;
        for (const auto& v : vertices_) scale = std::max(scale, v.cwiseAbs().maxCoeff());
        const double tol = 1e-9 * std::max(1.0, scale);
        std::vector<int> vmap(t.vertices().size(), -2);
        for (const auto& [idx, m] : t.term_map()) {
            std::vector<int> s;
            for (int i : idx) {
                auto& slot = vmap[static_cast<std::size_t>(i)];
                if (slot == -2) slot = locate_vertex(t.vertices()[static_cast<std::size_t>(i)], tol);
                if (slot < 0) throw DomainError("chain vertex is not a vertex of the complex");
                s.push_back(slot);
            }
            int sign = detail::sort_with_parity(s);
            int k = find(s);
            if (k < 0) throw DomainError("chain simplex is not a simplex of the complex");
            c[k] += sign * m;
        }
        return c;
    }

    Chain chain_from(int degree, const Vec& coeffs, double drop_below = 0.0) const
    {
        Chain c(degree, ambient_);
        const auto& s = simplices(degree);
        if (coeffs.size() != static_cast<Eigen::Index>(s.size())) throw DegreeError("coefficient count mismatch");
        for (std::size_t i = 0; i < s.size(); ++i) {
            double m = coeffs[static_cast<Eigen::Index>(i)];
            if (std::abs(m) <= drop_below) continue;
            c.add_simplex_points(points(s[i]), m);
        }
        return c;
    }

private:
    void insert(const std::vector<int>& sorted)
    {
        const auto d = static_cast<std::size_t>(sorted.size() - 1);
        auto [it, added] = index_[d].emplace(sorted, static_cast<int>(by_degree_[d].size()));
        if (added) by_degree_[d].push_back(sorted);
    }

    int ambient_ = 0;
    int top_ = 0;
    std::vector<Vec> vertices_;
    std::vector<std::vector<std::vector<int>>> by_degree_;
    std::vector<std::map<std::vector<int>, int>> index_;
};

/// The box as a positively oriented top-dimensional chain, triangulated like
/// SimplicialComplex::freudenthal.
inline Chain box_chain(const Box& box, int resolution = 1)
{
    const int n = box.dim();
    SimplicialComplex x = SimplicialComplex::freudenthal(box, resolution);
    Chain c(n, n);
    for (const auto& s : x.simplices(n)) {
        auto pts = x.points(s);
        Mat e(n, n);
        for (int k = 0; k < n; ++k) e.col(k) = pts[static_cast<std::size_t>(k) + 1] - pts[0];
        c.add_simplex_points(pts, e.determinant() > 0 ? 1.0 : -1.0);
    }
    return c;
}

} // namespace currentkit

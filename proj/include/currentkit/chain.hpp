#pragma once

// Simplicial r-chains with real multiplicities. Each term stores its vertex
// indices in increasing order; the orientation of the listed order is folded
// into the multiplicity, so equal simplices merge and opposite faces cancel.

#include "exterior_algebra.hpp"
#include "box.hpp"
#include "lp.hpp"

#include <map>
#include <mutex>
#include <numeric>

namespace currentkit {

/// r-dimensional volume of the simplex spanned by `pts` (Gram determinant).
inline double simplex_volume(const std::vector<Vec>& pts)
{
    if (pts.empty()) throw Error("simplex needs at least one vertex");
    const int r = static_cast<int>(pts.size()) - 1;
    if (r == 0) return 1.0;
    Mat e(pts.front().size(), r);
    for (int k = 0; k < r; ++k) e.col(k) = pts[static_cast<std::size_t>(k) + 1] - pts[0];
    double g = (e.transpose() * e).determinant();
    return std::sqrt(std::max(g, 0.0)) / factorial(r);
}

/// Unit simple r-vector of the oriented simplex (edges from the first vertex).
inline MultiVector unit_tangent(const std::vector<Vec>& pts)
{
    const int r = static_cast<int>(pts.size()) - 1;
    const int n = static_cast<int>(pts.front().size());
    if (r == 0) return MultiVector::scalar(n, 1.0);
    Mat e(n, r);
    for (int k = 0; k < r; ++k) e.col(k) = pts[static_cast<std::size_t>(k) + 1] - pts[0];
    MultiVector t = simple_multivector(e);
    double m = mass(t);
    if (m <= 0.0) throw DomainError("degenerate simplex has no tangent");
    return t * (1.0 / m);
}

namespace detail {

/// Sorts `idx` in place and returns the parity of the sorting permutation.
inline int sort_with_parity(std::vector<int>& idx)
{
    int sign = 1;
    for (std::size_t i = 1; i < idx.size(); ++i)
        for (std::size_t j = i; j > 0 && idx[j - 1] > idx[j]; --j) {
            std::swap(idx[j - 1], idx[j]);
            sign = -sign;
        }
    return sign;
}

/// Edgewise (Freudenthal) subdivision of an r-simplex into 2^r children.
/// Child vertex (a, b) is the midpoint of parent vertices a and b (a == b for
/// a parent vertex). Children are listed with the parent's orientation.
///
/// Built from the Kuhn triangulation of the doubled staircase simplex
/// {2 >= y_1 >= ... >= y_r >= 0}: a lattice point with a entries equal to 2
/// and b entries >= 1 corresponds to the midpoint of parent vertices a and b.
inline const std::vector<std::vector<std::pair<int, int>>>& subdivision_pattern(int r)
{
    static std::mutex mu;
    static std::map<int, std::vector<std::vector<std::pair<int, int>>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(r);
    if (it != cache.end()) return it->second;
    std::vector<std::vector<std::pair<int, int>>> children;
    if (r == 0) {
        children.push_back({{0, 0}});
    } else {
        std::vector<int> perm(static_cast<std::size_t>(r));
        for (std::uint32_t z = 0; z < (1u << r); ++z) {
            std::iota(perm.begin(), perm.end(), 0);
            do {
                std::vector<std::vector<int>> ys;
                std::vector<int> y(static_cast<std::size_t>(r));
                for (int i = 0; i < r; ++i) y[static_cast<std::size_t>(i)] = (z >> i) & 1u;
                ys.push_back(y);
                for (int k = 0; k < r; ++k) {
                    ++y[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])];
                    ys.push_back(y);
                }
                bool inside = true;
                for (const auto& v : ys)
                    for (std::size_t i = 0; i < v.size(); ++i)
                        if (v[i] > 2 || (i > 0 && v[i] > v[i - 1])) inside = false;
                if (!inside) continue;
                Mat e(r, r);
                for (int k = 0; k < r; ++k)
                    for (int i = 0; i < r; ++i)
                        e(i, k) = ys[static_cast<std::size_t>(k) + 1][static_cast<std::size_t>(i)] - ys[0][static_cast<std::size_t>(i)];
                std::vector<std::pair<int, int>> child;
                for (const auto& v : ys) {
                    int a = 0, b = 0;
                    for (int c : v) {
                        a += (c == 2);
                        b += (c >= 1);
                    }
                    child.emplace_back(a, b);
                }
                if (e.determinant() < 0) std::swap(child[child.size() - 1], child[child.size() - 2]);
                children.push_back(std::move(child));
            } while (std::next_permutation(perm.begin(), perm.end()));
        }
    }
    return cache.emplace(r, std::move(children)).first->second;
}

} // namespace detail

struct ChainTerm {
    std::vector<int> vertices; // increasing
    double multiplicity = 0.0;
};

class Chain {
public:
    Chain() = default;
    Chain(int degree, int ambient) : degree_(degree), ambient_(ambient)
    {
        if (ambient < 1 || ambient > kMaxAmbient || degree < 0 || degree > ambient)
            throw DegreeError("chain degree out of range");
    }

    int degree() const { return degree_; }
    int ambient() const { return ambient_; }
    const std::vector<Vec>& vertices() const { return vertices_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    std::vector<ChainTerm> terms() const
    {
        std::vector<ChainTerm> out;
        out.reserve(terms_.size());
        for (const auto& [idx, m] : terms_) out.push_back({idx, m});
        return out;
    }

    /// Adds (or finds, by exact coordinates) a vertex.
    int add_vertex(const Vec& p)
    {
        if (p.size() != ambient_) throw DegreeError("vertex dimension does not match the chain");
        if (!p.allFinite()) throw Error("non-finite vertex coordinate");
        std::vector<double> key(p.data(), p.data() + p.size());
        auto [it, inserted] = lookup_.emplace(std::move(key), static_cast<int>(vertices_.size()));
        if (inserted) vertices_.push_back(p);
        return it->second;
    }

    /// Adds m times the simplex with the given oriented vertex order.
    void add_simplex(std::vector<int> idx, double m)
    {
        if (static_cast<int>(idx.size()) != degree_ + 1) throw DegreeError("simplex vertex count must be degree + 1");
        if (!std::isfinite(m)) throw Error("non-finite multiplicity");
        for (int i : idx)
            if (i < 0 || i >= static_cast<int>(vertices_.size())) throw Error("simplex vertex index out of range");
        int sign = detail::sort_with_parity(idx);
        for (std::size_t i = 1; i < idx.size(); ++i)
            if (idx[i] == idx[i - 1]) throw DomainError("simplex repeats a vertex");
        if (degree_ > 0 && is_degenerate(points(idx))) throw DomainError("degenerate simplex (zero volume)");
        if (m == 0.0) return;
        auto [it, inserted] = terms_.emplace(std::move(idx), sign * m);
        if (!inserted) {
            it->second += sign * m;
            if (it->second == 0.0) terms_.erase(it);
        }
    }

    void add_simplex_points(const std::vector<Vec>& pts, double m)
    {
        std::vector<int> idx;
        for (const auto& p : pts) idx.push_back(add_vertex(p));
        add_simplex(std::move(idx), m);
    }

    std::vector<Vec> points(const std::vector<int>& idx) const
    {
        std::vector<Vec> pts;
        for (int i : idx) pts.push_back(vertices_[static_cast<std::size_t>(i)]);
        return pts;
    }

    static bool is_degenerate(const std::vector<Vec>& pts)
    {
        const int r = static_cast<int>(pts.size()) - 1;
        if (r == 0) return false;
        double scale = 0.0;
        for (const auto& p : pts) scale = std::max(scale, (p - pts[0]).norm());
        if (scale == 0.0) return true;
        return simplex_volume(pts) <= 1e-12 * std::pow(scale, r) / factorial(r);
    }

    /// Drops terms with |m| <= tol.
    void prune(double tol)
    {
        for (auto it = terms_.begin(); it != terms_.end();)
            it = (std::abs(it->second) <= tol) ? terms_.erase(it) : std::next(it);
    }

    Chain& operator*=(double s)
    {
        if (s == 0.0) terms_.clear();
        for (auto& [idx, m] : terms_) m *= s;
        return *this;
    }

    Chain& operator+=(const Chain& o)
    {
        if (o.degree_ != degree_ || o.ambient_ != ambient_) throw DegreeError("chain sum: degree mismatch");
        for (const auto& [idx, m] : o.terms_) {
            std::vector<int> mapped;
            for (int i : idx) mapped.push_back(add_vertex(o.vertices_[static_cast<std::size_t>(i)]));
            add_simplex(std::move(mapped), m);
        }
        return *this;
    }

    friend Chain operator+(Chain a, const Chain& b) { return a += b; }
    friend Chain operator*(double s, Chain a) { return a *= s; }
    friend Chain operator-(Chain a, const Chain& b) { return a += (-1.0) * b; }

    Box bounding_box(double pad = 0.0) const
    {
        std::vector<Vec> used;
        for (const auto& [idx, m] : terms_)
            for (int i : idx) used.push_back(vertices_[static_cast<std::size_t>(i)]);
        if (used.empty()) return Box::cube(ambient_, 0.0, 1.0);
        return Box::bounding(used, pad);
    }

    const std::map<std::vector<int>, double>& term_map() const { return terms_; }

private:
    int degree_ = 0;
    int ambient_ = 1;
    std::vector<Vec> vertices_;
    std::map<std::vector<double>, int> lookup_;
    std::map<std::vector<int>, double> terms_;
};

/// Alternating-sum boundary; faces shared with opposite orientation cancel exactly.
inline Chain boundary(const Chain& t)
{
    if (t.degree() < 1) throw DegreeError("boundary of a 0-chain");
    Chain b(t.degree() - 1, t.ambient());
    for (const auto& v : t.vertices()) b.add_vertex(v);
    for (const auto& [idx, m] : t.term_map()) {
        for (std::size_t k = 0; k < idx.size(); ++k) {
            std::vector<int> face;
            for (std::size_t j = 0; j < idx.size(); ++j)
                if (j != k) face.push_back(idx[j]);
            b.add_simplex(std::move(face), (k % 2 == 0) ? m : -m);
        }
    }
    return b;
}

/// Applies the edgewise subdivision `levels` times; every child inherits its
/// parent's multiplicity and orientation.
inline Chain subdivide(const Chain& t, int levels)
{
    Chain cur = t;
    for (int level = 0; level < levels; ++level) {
        Chain next(cur.degree(), cur.ambient());
        std::map<std::pair<int, int>, int> midpoint;
        const auto& pattern = detail::subdivision_pattern(cur.degree());
        std::vector<int> local(cur.vertices().size(), -1);
        auto vertex = [&](int gi) {
            if (local[static_cast<std::size_t>(gi)] < 0)
                local[static_cast<std::size_t>(gi)] = next.add_vertex(cur.vertices()[static_cast<std::size_t>(gi)]);
            return local[static_cast<std::size_t>(gi)];
        };
        for (const auto& [idx, m] : cur.term_map()) {
            for (const auto& child : pattern) {
                std::vector<int> cv;
                for (auto [a, b] : child) {
                    int ga = idx[static_cast<std::size_t>(a)], gb = idx[static_cast<std::size_t>(b)];
                    if (ga == gb) {
                        cv.push_back(vertex(ga));
                        continue;
                    }
                    auto key = std::minmax(ga, gb);
                    auto it = midpoint.find(key);
                    if (it == midpoint.end()) {
                        Vec mid = 0.5 * (cur.vertices()[static_cast<std::size_t>(key.first)] +
                                         cur.vertices()[static_cast<std::size_t>(key.second)]);
                        it = midpoint.emplace(key, next.add_vertex(mid)).first;
                    }
                    cv.push_back(it->second);
                }
                next.add_simplex(std::move(cv), m);
            }
        }
        cur = std::move(next);
    }
    return cur;
}

/// The hyperplane {x : normal . x = offset}.
struct Hyperplane {
    Vec normal;
    double offset = 0.0;
    double side(const Vec& x) const { return normal.dot(x) - offset; }
};

namespace detail {

using PointSimplex = std::vector<Vec>;

/// Intersection of segment pq with the plane, computed from the
/// lexicographically ordered endpoints so shared edges give identical points.
inline Vec plane_crossing(const Hyperplane& h, Vec p, Vec q)
{
    if (std::lexicographical_compare(q.data(), q.data() + q.size(), p.data(), p.data() + p.size())) std::swap(p, q);
    const double fp = h.side(p), fq = h.side(q);
    return p + (fp / (fp - fq)) * (q - p);
}

inline std::vector<PointSimplex> cone(const Vec& apex, const std::vector<PointSimplex>& base)
{
    std::vector<PointSimplex> out;
    for (const auto& b : base) {
        PointSimplex s{apex};
        s.insert(s.end(), b.begin(), b.end());
        out.push_back(std::move(s));
    }
    return out;
}

inline PointSimplex drop_vertex(const PointSimplex& s, std::size_t k)
{
    PointSimplex f;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (i != k) f.push_back(s[i]);
    return f;
}

/// Triangulates S cap H (dimension r - 1) by pulling from one crossing point.
/// Vertices with side >= 0 count as the positive side.
inline std::vector<PointSimplex> cut_face(const PointSimplex& s, const Hyperplane& h)
{
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (!(h.side(s[i]) >= 0.0 && h.side(s[j]) < 0.0)) continue;
            Vec b = plane_crossing(h, s[i], s[j]);
            if (s.size() == 2) return {{b}};
            auto out = cone(b, cut_face(drop_vertex(s, i), h));
            auto more = cone(b, cut_face(drop_vertex(s, j), h));
            out.insert(out.end(), more.begin(), more.end());
            return out;
        }
    return {};
}

/// Triangulates S cap {side >= 0} by pulling from its most positive vertex.
inline std::vector<PointSimplex> clip_simplex(const PointSimplex& s, const Hyperplane& h)
{
    std::size_t a = 0;
    bool any_neg = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (h.side(s[i]) < 0.0) any_neg = true;
        if (h.side(s[i]) > h.side(s[a])) a = i;
    }
    if (!any_neg) return {s};
    if (h.side(s[a]) <= 0.0) return {};
    auto out = cone(s[a], clip_simplex(drop_vertex(s, a), h));
    auto more = cone(s[a], cut_face(s, h));
    out.insert(out.end(), more.begin(), more.end());
    return out;
}

} // namespace detail

/// Splits every simplex of the chain along the hyperplanes. The result is the
/// same current, triangulated so no simplex crosses a hyperplane.
inline Chain split_chain(const Chain& t, const std::vector<Hyperplane>& planes)
{
    Chain cur = t;
    const int r = t.degree();
    if (r == 0) return cur;
    for (const auto& h : planes) {
        Chain next(r, t.ambient());
        const Hyperplane flipped{-h.normal, -h.offset};
        for (const auto& [idx, m] : cur.term_map()) {
            auto pts = cur.points(idx);
            bool pos = false, neg = false;
            for (const auto& p : pts) (h.side(p) >= 0.0 ? pos : neg) = true;
            if (!(pos && neg)) {
                next.add_simplex_points(pts, m);
                continue;
            }
            const MultiVector tangent = unit_tangent(pts);
            for (const auto* plane : {&h, &flipped})
                for (const auto& piece : detail::clip_simplex(pts, *plane)) {
                    if (Chain::is_degenerate(piece)) continue;
                    const MultiVector pt = unit_tangent(piece);
                    double dot = 0.0;
                    for (std::size_t i = 0; i < pt.size(); ++i) dot += pt[i] * tangent[i];
                    const double orient = dot > 0.0 ? 1.0 : -1.0;
                    next.add_simplex_points(piece, orient * m);
                }
        }
        cur = std::move(next);
    }
    return cur;
}

struct ChainMass {
    double value = 0.0;
    /// False when two simplices overlap in a set of positive r-measure; the
    /// value is then only an upper bound for the dual mass.
    bool disjoint = true;
};

namespace detail {

/// True when the relative interiors of two r-simplices in a common r-plane meet.
inline bool simplices_overlap(const std::vector<Vec>& p, const std::vector<Vec>& q)
{
    const int r = static_cast<int>(p.size()) - 1;
    const int n = static_cast<int>(p.front().size());
    // Coplanarity: q's vertices lie in p's affine hull.
    Mat e(n, r);
    for (int k = 0; k < r; ++k) e.col(k) = p[static_cast<std::size_t>(k) + 1] - p[0];
    Eigen::ColPivHouseholderQR<Mat> qr(e);
    double scale = e.norm();
    for (const auto& x : q) {
        Vec d = x - p[0];
        Vec proj = e * qr.solve(d);
        if ((d - proj).norm() > 1e-9 * std::max(scale, 1.0)) return false;
    }
    // maximize delta: sum l_i p_i = sum m_j q_j, l, m >= delta, sum l = sum m = 1.
    const int np = r + 1;
    LPProblem lp;
    const int nv = 2 * np + 1;
    lp.cost = Vec::Zero(nv);
    lp.cost[nv - 1] = -1.0;
    lp.a_eq = Mat::Zero(n + 2, nv);
    lp.b_eq = Vec::Zero(n + 2);
    for (int i = 0; i < np; ++i) {
        lp.a_eq.block(0, i, n, 1) = p[static_cast<std::size_t>(i)];
        lp.a_eq.block(0, np + i, n, 1) = -q[static_cast<std::size_t>(i)];
        lp.a_eq(n, i) = 1.0;
        lp.a_eq(n + 1, np + i) = 1.0;
    }
    lp.b_eq[n] = lp.b_eq[n + 1] = 1.0;
    lp.a_ub = Mat::Zero(2 * np, nv);
    lp.b_ub = Vec::Zero(2 * np);
    for (int i = 0; i < 2 * np; ++i) {
        lp.a_ub(i, i) = -1.0;
        lp.a_ub(i, nv - 1) = 1.0;
    }
    lp.lower = Vec::Zero(nv);
    lp.lower[nv - 1] = -1.0;
    lp.upper = Vec::Constant(nv, kInf);
    lp.upper[nv - 1] = 1.0;
    auto sol = lp_solve(lp);
    return sol.status == LPStatus::Optimal && -sol.objective > 1e-9;
}

} // namespace detail

/// M(T) = sum |m_i| vol_i, with an overlap check (bounding-box filtered).
inline ChainMass mass_chain(const Chain& t, bool check_overlap = true)
{
    ChainMass res;
    std::vector<std::vector<Vec>> simplices;
    for (const auto& [idx, m] : t.term_map()) {
        auto pts = t.points(idx);
        res.value += std::abs(m) * simplex_volume(pts);
        if (check_overlap && t.degree() > 0) {
            simplices.push_back(std::move(pts));
        }
    }
    if (!check_overlap) return res;
    if (t.degree() == 0) return res; // distinct points never overlap after merging
    for (std::size_t i = 0; i < simplices.size() && res.disjoint; ++i) {
        for (std::size_t j = i + 1; j < simplices.size(); ++j) {
            // Tight boxes (without the degenerate-axis padding) for the filter.
            Vec lo_i = simplices[i][0], hi_i = lo_i, lo_j = simplices[j][0], hi_j = lo_j;
            for (const auto& p : simplices[i]) {
                lo_i = lo_i.cwiseMin(p);
                hi_i = hi_i.cwiseMax(p);
            }
            for (const auto& p : simplices[j]) {
                lo_j = lo_j.cwiseMin(p);
                hi_j = hi_j.cwiseMax(p);
            }
            if (((hi_j - lo_i).array() < 0.0).any() || ((hi_i - lo_j).array() < 0.0).any()) continue;
            if (detail::simplices_overlap(simplices[i], simplices[j])) {
                res.disjoint = false;
                break;
            }
        }
    }
    return res;
}

inline double mass(const Chain& t)
{
    return mass_chain(t, false).value;
}

/// A 0-chain holding a single point.
inline Chain point_chain(const Vec& p, double m = 1.0)
{
    Chain c(0, static_cast<int>(p.size()));
    c.add_simplex({c.add_vertex(p)}, m);
    return c;
}

/// The oriented simplex [p_0, ..., p_r] with multiplicity m.
inline Chain simplex_chain(const std::vector<Vec>& pts, double m = 1.0)
{
    Chain c(static_cast<int>(pts.size()) - 1, static_cast<int>(pts.front().size()));
    c.add_simplex_points(pts, m);
    return c;
}

} // namespace currentkit

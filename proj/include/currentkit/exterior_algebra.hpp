#pragma once

// Dense exterior algebra over R^n. An r-vector (or r-covector) is stored as its
// C(n, r) coefficients in the lexicographic basis e_{i_1} ^ ... ^ e_{i_r},
// i_1 < ... < i_r. Indices are 0-based throughout the C++ API; file formats
// use 1-based indices.

#include "core.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <compare>
#include <random>
#include <span>
#include <type_traits>
#include <vector>

namespace currentkit {

namespace detail {

struct BasisTable {
    // masks[r] lists the r-subsets of {0..n-1} as bitmasks in lexicographic order.
    std::array<std::vector<std::uint32_t>, kMaxAmbient + 1> masks;
    std::vector<int> rank_of_mask;
};

inline BasisTable build_basis_table(int n)
{
    BasisTable t;
    t.rank_of_mask.assign(std::size_t{1} << n, -1);
    for (int r = 0; r <= n; ++r) {
        std::vector<int> idx(r);
        for (int i = 0; i < r; ++i) idx[i] = i;
        while (true) {
            std::uint32_t m = 0;
            for (int i : idx) m |= (1u << i);
            t.rank_of_mask[m] = static_cast<int>(t.masks[r].size());
            t.masks[r].push_back(m);
            int i = r - 1;
            while (i >= 0 && idx[i] == n - r + i) --i;
            if (i < 0) break;
            ++idx[i];
            for (int j = i + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    return t;
}

inline const BasisTable& basis_table(int n)
{
    static const std::array<BasisTable, kMaxAmbient + 1> tables = [] {
        std::array<BasisTable, kMaxAmbient + 1> a;
        for (int k = 0; k <= kMaxAmbient; ++k) a[k] = build_basis_table(k);
        return a;
    }();
    if (n < 0 || n > kMaxAmbient) throw DegreeError("ambient dimension out of range");
    return tables[static_cast<std::size_t>(n)];
}

/// Sign of e_a ^ e_b relative to e_{a|b}; zero when the masks overlap.
inline int merge_sign(std::uint32_t a, std::uint32_t b)
{
    if (a & b) return 0;
    int inversions = 0;
    for (std::uint32_t rest = b; rest; rest &= rest - 1) {
        int j = std::countr_zero(rest);
        inversions += std::popcount(a >> (j + 1));
    }
    return (inversions & 1) ? -1 : 1;
}

} // namespace detail

/// Strictly increasing multi-index lambda in Lambda(r, n).
class MultiIndex {
public:
    MultiIndex() = default;

    MultiIndex(std::vector<int> entries, int ambient) : ambient_(ambient)
    {
        if (ambient < 0 || ambient > kMaxAmbient) throw DegreeError("ambient dimension out of range");
        if (static_cast<int>(entries.size()) > ambient) throw DegreeError("multi-index degree exceeds ambient dimension");
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (entries[i] < 0 || entries[i] >= ambient) throw DegreeError("multi-index entry out of range");
            if (i > 0 && entries[i] <= entries[i - 1]) throw DegreeError("multi-index entries must be strictly increasing");
            mask_ |= (1u << entries[i]);
        }
    }

    static MultiIndex from_mask(std::uint32_t mask, int ambient)
    {
        MultiIndex m;
        m.ambient_ = ambient;
        m.mask_ = mask;
        return m;
    }

    static MultiIndex from_rank(int degree, int ambient, std::size_t rank)
    {
        return from_mask(detail::basis_table(ambient).masks.at(degree).at(rank), ambient);
    }

    /// All of Lambda(r, n) in lexicographic order.
    static std::vector<MultiIndex> all(int degree, int ambient)
    {
        std::vector<MultiIndex> out;
        for (auto m : detail::basis_table(ambient).masks.at(degree)) out.push_back(from_mask(m, ambient));
        return out;
    }

    int degree() const { return std::popcount(mask_); }
    int ambient() const { return ambient_; }
    std::uint32_t mask() const { return mask_; }

    std::vector<int> entries() const
    {
        std::vector<int> e;
        for (std::uint32_t rest = mask_; rest; rest &= rest - 1) e.push_back(std::countr_zero(rest));
        return e;
    }

    std::size_t rank() const { return static_cast<std::size_t>(detail::basis_table(ambient_).rank_of_mask[mask_]); }

    bool contains(int i) const { return (mask_ >> i) & 1u; }

    friend bool operator==(const MultiIndex& a, const MultiIndex& b) = default;
    friend auto operator<=>(const MultiIndex& a, const MultiIndex& b)
    {
        if (auto c = a.ambient_ <=> b.ambient_; c != 0) return c;
        if (auto c = a.degree() <=> b.degree(); c != 0) return c;
        return a.entries() <=> b.entries();
    }

private:
    int ambient_ = 0;
    std::uint32_t mask_ = 0;
};

struct VectorTag {};
struct CovectorTag {};

/// Homogeneous element of the exterior algebra (r-vectors or r-covectors).
template <class Tag, class Scalar = double>
class Alternating {
public:
    using scalar_type = Scalar;

    Alternating() = default;

    Alternating(int degree, int ambient)
        : degree_(degree), ambient_(ambient), coeffs_(checked_size(degree, ambient), Scalar(0))
    {}

    Alternating(int degree, int ambient, std::vector<Scalar> coeffs)
        : degree_(degree), ambient_(ambient), coeffs_(std::move(coeffs))
    {
        if (coeffs_.size() != checked_size(degree, ambient)) throw DegreeError("coefficient count does not match C(n, r)");
        if constexpr (std::is_floating_point_v<Scalar>) {
            for (auto c : coeffs_)
                if (!std::isfinite(c)) throw Error("non-finite exterior algebra coefficient");
        }
    }

    static Alternating unit(const MultiIndex& idx, Scalar c = Scalar(1))
    {
        Alternating a(idx.degree(), idx.ambient());
        a.coeffs_[idx.rank()] = c;
        return a;
    }

    static Alternating scalar(int ambient, Scalar c)
    {
        Alternating a(0, ambient);
        a.coeffs_[0] = c;
        return a;
    }

    /// Degree-1 element with the given components.
    template <class Derived>
    static Alternating from_components(const Eigen::MatrixBase<Derived>& v)
    {
        Alternating a(1, static_cast<int>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) a.coeffs_[static_cast<std::size_t>(i)] = v[i];
        return a;
    }

    int degree() const { return degree_; }
    int ambient() const { return ambient_; }
    std::size_t size() const { return coeffs_.size(); }

    const Scalar& operator[](std::size_t rank) const { return coeffs_[rank]; }
    Scalar& operator[](std::size_t rank) { return coeffs_[rank]; }
    Scalar at(const MultiIndex& idx) const
    {
        if (idx.degree() != degree_ || idx.ambient() != ambient_) throw DegreeError("multi-index does not match element");
        return coeffs_[idx.rank()];
    }

    std::span<const Scalar> coefficients() const { return coeffs_; }

    bool is_zero() const
    {
        return std::all_of(coeffs_.begin(), coeffs_.end(), [](const Scalar& c) { return c == Scalar(0); });
    }

    Alternating& operator+=(const Alternating& o)
    {
        check_same(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
        return *this;
    }
    Alternating& operator-=(const Alternating& o)
    {
        check_same(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
        return *this;
    }
    Alternating& operator*=(const Scalar& s)
    {
        for (auto& c : coeffs_) c *= s;
        return *this;
    }

    friend Alternating operator+(Alternating a, const Alternating& b) { return a += b; }
    friend Alternating operator-(Alternating a, const Alternating& b) { return a -= b; }
    friend Alternating operator-(Alternating a)
    {
        for (auto& c : a.coeffs_) c = -c;
        return a;
    }
    friend Alternating operator*(Alternating a, const Scalar& s) { return a *= s; }
    friend Alternating operator*(const Scalar& s, Alternating a) { return a *= s; }
    friend bool operator==(const Alternating&, const Alternating&) = default;

private:
    static std::size_t checked_size(int degree, int ambient)
    {
        if (ambient < 0 || ambient > kMaxAmbient) throw DegreeError("ambient dimension out of range");
        if (degree < 0 || degree > ambient) throw DegreeError("degree out of range for ambient dimension");
        return binomial(ambient, degree);
    }

    void check_same(const Alternating& o) const
    {
        if (o.degree_ != degree_ || o.ambient_ != ambient_) throw DegreeError("degree or ambient mismatch");
    }

    int degree_ = 0;
    int ambient_ = 0;
    std::vector<Scalar> coeffs_{Scalar(0)};
};

template <class Scalar = double>
using MultiVectorT = Alternating<VectorTag, Scalar>;
template <class Scalar = double>
using CoVectorT = Alternating<CovectorTag, Scalar>;
using MultiVector = MultiVectorT<double>;
using CoVector = CoVectorT<double>;

/// Exterior product. Throws DegreeError when p + q > n or ambients differ.
template <class Tag, class Scalar>
Alternating<Tag, Scalar> wedge(const Alternating<Tag, Scalar>& a, const Alternating<Tag, Scalar>& b)
{
    if (a.ambient() != b.ambient()) throw DegreeError("wedge: ambient mismatch");
    const int n = a.ambient();
    const int deg = a.degree() + b.degree();
    if (deg > n) throw DegreeError("wedge: degree overflow");
    const auto& tab = detail::basis_table(n);
    const auto& ma = tab.masks[static_cast<std::size_t>(a.degree())];
    const auto& mb = tab.masks[static_cast<std::size_t>(b.degree())];
    Alternating<Tag, Scalar> out(deg, n);
    for (std::size_t i = 0; i < ma.size(); ++i) {
        if (a[i] == Scalar(0)) continue;
        for (std::size_t j = 0; j < mb.size(); ++j) {
            if (b[j] == Scalar(0)) continue;
            int s = detail::merge_sign(ma[i], mb[j]);
            if (s == 0) continue;
            auto r = static_cast<std::size_t>(tab.rank_of_mask[ma[i] | mb[j]]);
            if (s > 0)
                out[r] += a[i] * b[j];
            else
                out[r] -= a[i] * b[j];
        }
    }
    return out;
}

/// Front-slot contraction (omega -| v)(w_2, ..., w_r) = omega(v, w_2, ..., w_r),
/// so (dx ^ dy) -| e_x = dy and (dx ^ dy) -| e_y = -dx.
template <class Scalar>
CoVectorT<Scalar> interior_product(const CoVectorT<Scalar>& omega, std::span<const Scalar> v)
{
    if (omega.degree() < 1) throw DegreeError("interior product of a 0-covector");
    const int n = omega.ambient();
    if (static_cast<int>(v.size()) != n) throw DegreeError("interior product: vector dimension mismatch");
    const auto& tab = detail::basis_table(n);
    const auto& masks = tab.masks[static_cast<std::size_t>(omega.degree())];
    CoVectorT<Scalar> out(omega.degree() - 1, n);
    for (std::size_t l = 0; l < masks.size(); ++l) {
        if (omega[l] == Scalar(0)) continue;
        const std::uint32_t m = masks[l];
        int k = 0;
        for (std::uint32_t rest = m; rest; rest &= rest - 1, ++k) {
            int i = std::countr_zero(rest);
            if (v[static_cast<std::size_t>(i)] == Scalar(0)) continue;
            auto r = static_cast<std::size_t>(tab.rank_of_mask[m & ~(1u << i)]);
            if (k & 1)
                out[r] -= omega[l] * v[static_cast<std::size_t>(i)];
            else
                out[r] += omega[l] * v[static_cast<std::size_t>(i)];
        }
    }
    return out;
}

inline CoVector interior_product(const CoVector& omega, const Vec& v)
{
    return interior_product<double>(omega, std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

/// Same operation written v |- omega elsewhere; kept as an alias of the single convention.
inline CoVector contraction(const Vec& v, const CoVector& omega)
{
    return interior_product(omega, v);
}

template <class Scalar>
Scalar pair(const CoVectorT<Scalar>& omega, const MultiVectorT<Scalar>& xi)
{
    if (omega.degree() != xi.degree() || omega.ambient() != xi.ambient()) throw DegreeError("pair: degree mismatch");
    Scalar s(0);
    for (std::size_t i = 0; i < omega.size(); ++i) s += omega[i] * xi[i];
    return s;
}

/// Euclidean norm of the coefficients; for r-vectors this is the mass |xi|.
template <class Tag>
double euclidean_norm(const Alternating<Tag, double>& a)
{
    double s = 0;
    for (auto c : a.coefficients()) s += c * c;
    return std::sqrt(s);
}

inline double mass(const MultiVector& xi)
{
    return euclidean_norm(xi);
}

/// The simple r-vector v_1 ^ ... ^ v_r for the columns of `frame` (coefficients are r x r minors).
inline MultiVector simple_multivector(const Mat& frame)
{
    const int n = static_cast<int>(frame.rows());
    const int r = static_cast<int>(frame.cols());
    MultiVector out(r, n);
    if (r == 0) {
        out[0] = 1.0;
        return out;
    }
    const auto& masks = detail::basis_table(n).masks[static_cast<std::size_t>(r)];
    Mat sub(r, r);
    for (std::size_t l = 0; l < masks.size(); ++l) {
        int row = 0;
        for (std::uint32_t rest = masks[l]; rest; rest &= rest - 1) sub.row(row++) = frame.row(std::countr_zero(rest));
        out[l] = (r == 1) ? sub(0, 0) : sub.determinant();
    }
    return out;
}

/// Induced action of a linear map J (m x n) on r-vectors: (Lambda_r J) xi.
inline MultiVector pushforward_multivector(const Mat& jac, const MultiVector& xi)
{
    const int m = static_cast<int>(jac.rows());
    const int n = static_cast<int>(jac.cols());
    if (xi.ambient() != n) throw DegreeError("pushforward_multivector: dimension mismatch");
    const int r = xi.degree();
    if (r > m) throw DegreeError("pushforward_multivector: degree exceeds target dimension");
    MultiVector out(r, m);
    if (r == 0) {
        out[0] = xi[0];
        return out;
    }
    const auto& rows = detail::basis_table(m).masks[static_cast<std::size_t>(r)];
    const auto& cols = detail::basis_table(n).masks[static_cast<std::size_t>(r)];
    Mat sub(r, r);
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (xi[c] == 0.0) continue;
        for (std::size_t l = 0; l < rows.size(); ++l) {
            int i = 0;
            for (std::uint32_t rr = rows[l]; rr; rr &= rr - 1, ++i) {
                int j = 0;
                for (std::uint32_t cc = cols[c]; cc; cc &= cc - 1, ++j) sub(i, j) = jac(std::countr_zero(rr), std::countr_zero(cc));
            }
            out[l] += xi[c] * (r == 1 ? sub(0, 0) : sub.determinant());
        }
    }
    return out;
}

/// Pullback of an r-covector on R^m under a linear map J : R^n -> R^m.
inline CoVector pullback_covector(const CoVector& omega, const Mat& jac)
{
    const int m = static_cast<int>(jac.rows());
    const int n = static_cast<int>(jac.cols());
    if (omega.ambient() != m) throw DegreeError("pullback_covector: dimension mismatch");
    const int r = omega.degree();
    if (r > n) throw DegreeError("pullback_covector: degree exceeds source dimension");
    CoVector out(r, n);
    if (r == 0) {
        out[0] = omega[0];
        return out;
    }
    const auto& rows = detail::basis_table(m).masks[static_cast<std::size_t>(r)];
    const auto& cols = detail::basis_table(n).masks[static_cast<std::size_t>(r)];
    Mat sub(r, r);
    for (std::size_t l = 0; l < rows.size(); ++l) {
        if (omega[l] == 0.0) continue;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            int i = 0;
            for (std::uint32_t rr = rows[l]; rr; rr &= rr - 1, ++i) {
                int j = 0;
                for (std::uint32_t cc = cols[c]; cc; cc &= cc - 1, ++j) sub(i, j) = jac(std::countr_zero(rr), std::countr_zero(cc));
            }
            out[c] += omega[l] * (r == 1 ? sub(0, 0) : sub.determinant());
        }
    }
    return out;
}

struct ComassOptions {
    int restarts = 100;
    double tolerance = 1e-8;
    int max_sweeps = 1000;
    std::uint64_t seed = 42;
};

struct ComassResult {
    double value = 0.0;
    /// Unit simple r-vector with pair(omega, witness) == value.
    MultiVector witness;
    bool exact = false;
};

namespace detail {

inline void orthonormalize_columns(Mat& v)
{
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
        for (Eigen::Index j = 0; j < k; ++j) v.col(k) -= v.col(j).dot(v.col(k)) * v.col(j);
        double nrm = v.col(k).norm();
        if (nrm < 1e-300) throw NumericalError("degenerate frame in comass ascent");
        v.col(k) /= nrm;
    }
}

/// The linear form w -> omega(v_0, .., v_{k-1}, w, v_{k+1}, .., v_{r-1}).
inline Vec frame_gradient(const CoVector& omega, const Mat& frame, Eigen::Index k)
{
    const Eigen::Index r = frame.cols();
    CoVector eta = omega;
    for (Eigen::Index j = 0; j < r; ++j) {
        if (j == k) continue;
        Vec col = frame.col(j);
        eta = interior_product(eta, col);
    }
    Vec g(omega.ambient());
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = eta[static_cast<std::size_t>(i)];
    if (((r - 1 - k) & 1) != 0) g = -g;
    return g;
}

} // namespace detail

/// Comass ||omega||_0 = sup { omega(xi) : xi simple, |xi| <= 1 }.
///
/// For r in {0, 1, n-1, n} every r-covector is simple (up to duality) and the
/// comass is the Euclidean norm. Otherwise the supremum is approached by block
/// coordinate ascent over orthonormal r-frames: each frame vector in turn is
/// replaced by the normalized partial gradient (the exact maximizer with the
/// others fixed), followed by Gram-Schmidt re-orthonormalization. The result is
/// a certified lower bound with a witness.
inline ComassResult comass(const CoVector& omega, const ComassOptions& opts = {})
{
    const int n = omega.ambient();
    const int r = omega.degree();
    ComassResult res;
    const auto unit_witness = [&](const CoVector& c) {
        MultiVector w(r, n, std::vector<double>(c.coefficients().begin(), c.coefficients().end()));
        return w;
    };

    if (r == 0 || r == 1 || r == n - 1 || r == n) {
        res.exact = true;
        res.value = euclidean_norm(omega);
        if (res.value > 0.0) {
            res.witness = unit_witness(omega) * (1.0 / res.value);
        } else {
            res.witness = MultiVector::unit(MultiIndex::from_rank(r, n, 0));
        }
        return res;
    }

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat best_frame;
    double best = -1.0;
    for (int attempt = 0; attempt < std::max(1, opts.restarts); ++attempt) {
        Mat v(n, r);
        for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = normal(rng);
        detail::orthonormalize_columns(v);
        double f = std::abs(pair(omega, simple_multivector(v)));
        for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
            for (Eigen::Index k = 0; k < r; ++k) {
                Vec g = detail::frame_gradient(omega, v, k);
                double gn = g.norm();
                if (gn > 0.0) v.col(k) = g / gn;
            }
            detail::orthonormalize_columns(v);
            double fn = std::abs(pair(omega, simple_multivector(v)));
            bool done = fn - f <= opts.tolerance * std::max(1.0, std::abs(fn));
            f = std::max(f, fn);
            if (done) break;
        }
        if (f > best) {
            best = f;
            best_frame = v;
        }
    }
    res.value = best;
    res.witness = simple_multivector(best_frame);
    if (pair(omega, res.witness) < 0.0) res.witness = -res.witness;
    return res;
}

} // namespace currentkit

#pragma once

// Lipschitz maps: constant estimation, bi-Lipschitz distortion, the strong
// Lipschitz distance, mollification and pushforward of chains.

#include "current.hpp"
#include "seminorms.hpp"

#include <random>

namespace currentkit {

class LipMap {
public:
    using Eval = std::function<Vec(const Vec&)>;
    using Jacobian = std::function<Mat(const Vec&)>;

    LipMap() = default;
    LipMap(int dim, Eval f, Jacobian jac = {}, std::string name = "map")
        : dim_(dim), eval_(std::move(f)), jac_(std::move(jac)), name_(std::move(name))
    {
        if (!eval_) throw Error("map needs an evaluator");
    }

    int dim() const { return dim_; }
    const std::string& name() const { return name_; }
    bool has_jacobian() const { return static_cast<bool>(jac_); }

    /// Declares f(x) = x for x outside the box.
    LipMap& identity_outside(Box k)
    {
        identity_outside_ = std::move(k);
        return *this;
    }
    const std::optional<Box>& identity_outside() const { return identity_outside_; }

    LipMap& with_domain(Box d)
    {
        domain_ = std::move(d);
        return *this;
    }
    const std::optional<Box>& domain() const { return domain_; }

    Vec operator()(const Vec& x) const
    {
        if (identity_outside_ && !identity_outside_->contains(x)) return x;
        if (domain_ && !domain_->contains(x, 1e-12 * domain_->diameter())) throw DomainError("point outside the map's domain");
        return eval_(x);
    }

    /// Exact Jacobian when available, central differences otherwise.
    Mat jacobian(const Vec& x) const
    {
        if (identity_outside_ && !identity_outside_->contains(x)) return Mat::Identity(dim_, dim_);
        if (jac_) return jac_(x);
        const double h = 1e-6 * std::max(1.0, x.norm());
        Mat j(dim_, dim_);
        for (int k = 0; k < dim_; ++k) {
            Vec xp = x, xm = x;
            xp[k] += h;
            xm[k] -= h;
            j.col(k) = (eval_(xp) - eval_(xm)) / (2 * h);
        }
        return j;
    }

    const Eval& evaluator() const { return eval_; }

private:
    int dim_ = 0;
    Eval eval_;
    Jacobian jac_;
    std::string name_;
    std::optional<Box> identity_outside_;
    std::optional<Box> domain_;
};

struct LipschitzOptions {
    std::size_t pairs = 100000;
    int resolution = 17;
    std::uint64_t seed = 42;
};

struct LipschitzEstimate {
    double value = 0.0;
    std::size_t samples = 0;
};

struct BiLipschitzEstimate {
    double lower = kInf; // c
    double upper = 0.0;  // d
    bool injective = true;
    std::size_t samples = 0;
};

namespace detail {

/// Halton sequence point `i` (1-based) in [0, 1]^n.
inline Vec halton(std::size_t i, int n)
{
    static constexpr int primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
    Vec x(n);
    for (int d = 0; d < n; ++d) {
        double f = 1.0, r = 0.0;
        std::size_t k = i;
        const int b = primes[d % 8];
        while (k > 0) {
            f /= b;
            r += f * static_cast<double>(k % static_cast<std::size_t>(b));
            k /= static_cast<std::size_t>(b);
        }
        x[d] = r;
    }
    return x;
}

/// Calls visit(x, y) on quasi-random pairs and on all grid-neighbor pairs of K.
template <class Visit>
std::size_t for_each_sample_pair(const Box& k, const LipschitzOptions& opts, Visit visit)
{
    const int n = k.dim();
    std::size_t count = 0;
    const Vec w = k.upper - k.lower;
    std::mt19937_64 rng(opts.seed);
    std::uniform_int_distribution<std::size_t> offset(1, 1u << 20);
    const std::size_t base = offset(rng);
    for (std::size_t i = 0; i < opts.pairs; ++i) {
        Vec x = k.lower + w.cwiseProduct(halton(base + 2 * i, n));
        Vec y = k.lower + w.cwiseProduct(halton(base + 2 * i + 1, n));
        if ((x - y).norm() > 0.0) {
            visit(x, y);
            ++count;
        }
    }
    const auto pts = grid_points(k, opts.resolution);
    for (auto [i, j] : grid_neighbor_pairs(n, opts.resolution)) {
        visit(pts[i], pts[j]);
        ++count;
    }
    return count;
}

} // namespace detail

/// Lip_{f,K}: secant ratios over sampled pairs, refined by Jacobian spectral
/// norms at grid points when the map provides an exact Jacobian.
inline LipschitzEstimate lipschitz_constant(const LipMap& f, const Box& k, const LipschitzOptions& opts = {})
{
    LipschitzEstimate e;
    e.samples = detail::for_each_sample_pair(k, opts, [&](const Vec& x, const Vec& y) {
        e.value = std::max(e.value, (f(x) - f(y)).norm() / (x - y).norm());
    });
    if (f.has_jacobian()) {
        for (const auto& x : grid_points(k, opts.resolution)) {
            Eigen::JacobiSVD<Mat> svd(f.jacobian(x));
            e.value = std::max(e.value, svd.singularValues()(0));
            ++e.samples;
        }
    }
    return e;
}

/// (c, d) with c |x - y| <= |f(x) - f(y)| <= d |x - y| on the samples. A lower
/// constant below `injectivity_tol` flags a map that is not injective at the
/// sampling resolution.
inline BiLipschitzEstimate bi_lipschitz_constants(const LipMap& f, const Box& k, const LipschitzOptions& opts = {},
                                                  double injectivity_tol = 1e-6)
{
    BiLipschitzEstimate e;
    e.samples = detail::for_each_sample_pair(k, opts, [&](const Vec& x, const Vec& y) {
        double q = (f(x) - f(y)).norm() / (x - y).norm();
        e.lower = std::min(e.lower, q);
        e.upper = std::max(e.upper, q);
    });
    // Pairs mirrored through the box center catch folds symmetric about it.
    const Vec c = k.center();
    for (const auto& x : grid_points(k, opts.resolution)) {
        Vec y = 2 * c - x;
        if ((x - y).norm() == 0.0) continue;
        double q = (f(x) - f(y)).norm() / (x - y).norm();
        e.lower = std::min(e.lower, q);
        e.upper = std::max(e.upper, q);
        ++e.samples;
    }
    e.injective = e.lower > injectivity_tol;
    return e;
}

/// max(sup_K |f - g|, Lip_{f - g, K}).
inline double strong_lip_distance(const LipMap& f, const LipMap& g, const Box& k, const LipschitzOptions& opts = {})
{
    double sup = 0.0;
    for (const auto& x : grid_points(k, opts.resolution)) sup = std::max(sup, (f(x) - g(x)).norm());
    double lip = 0.0;
    detail::for_each_sample_pair(k, opts, [&](const Vec& x, const Vec& y) {
        lip = std::max(lip, ((f(x) - g(x)) - (f(y) - g(y))).norm() / (x - y).norm());
        sup = std::max(sup, (f(x) - g(x)).norm());
    });
    return std::max(sup, lip);
}

/// Convolution of f with a unit-mass kernel of radius rho. The declared
/// identity-outside set grows by rho.
inline LipMap mollify(const LipMap& f, double rho, KernelType kernel = KernelType::Gaussian, int nodes_per_axis = 8)
{
    if (!(rho > 0.0)) throw Error("mollifier radius must be positive");
    if (f.domain()) {
        // The stencil must stay in the domain for every point of the shrunken box.
        const Vec w = f.domain()->upper - f.domain()->lower;
        if (2 * rho >= w.minCoeff()) throw DomainError("mollifier radius exceeds the domain size");
    }
    Mollifier m{rho, kernel, nodes_per_axis};
    LipMap base = f;
    auto g = mollify_function([base](const Vec& x) { return base(x); }, f.dim(), m);
    LipMap out(f.dim(), g, {}, f.name() + "_mollified");
    if (f.identity_outside()) out.identity_outside(f.identity_outside()->inflated(rho));
    return out;
}

struct PushforwardResult {
    Chain chain;
    std::size_t degenerate_terms = 0;
};

/// f_# T approximated by mapping the vertices of T subdivided `levels` times.
/// Exact for maps that are affine on each simplex. Image simplices with
/// collapsed volume are dropped and counted.
inline PushforwardResult pushforward_chain(const LipMap& f, const Chain& t, int levels = 0)
{
    Chain fine = subdivide(t, levels);
    PushforwardResult res{Chain(t.degree(), t.ambient()), 0};
    std::vector<int> image(fine.vertices().size());
    for (std::size_t i = 0; i < image.size(); ++i) image[i] = res.chain.add_vertex(f(fine.vertices()[i]));
    for (const auto& [idx, m] : fine.term_map()) {
        std::vector<int> mapped;
        for (int i : idx) mapped.push_back(image[static_cast<std::size_t>(i)]);
        try {
            res.chain.add_simplex(mapped, m);
        } catch (const DomainError&) {
            ++res.degenerate_terms;
        }
    }
    return res;
}

/// f^# phi using the map's Jacobian.
inline FormField pullback(const FormField& phi, const LipMap& f)
{
    return pullback(
        phi, [f](const Vec& x) { return f(x); }, [f](const Vec& x) { return f.jacobian(x); }, f.dim());
}

/// f_# T as a functional, (f_# T)(phi) = T(f^# phi): no geometric approximation
/// of the image, only quadrature on T.
inline Current pushforward_current(const LipMap& f, const Current& t)
{
    return Current::functional(t.degree(), t.ambient(),
                               {"pushforward(" + f.name() + ")", [f, t](const FormField& phi, const EvalOptions& eo) {
                                    return evaluate(t, pullback(phi, f), eo);
                                }});
}

// Map library.

inline LipMap affine_lipmap(const Mat& a, const Vec& b, std::string name = "affine")
{
    return LipMap(
        static_cast<int>(b.size()), [a, b](const Vec& x) -> Vec { return a * x + b; }, [a](const Vec&) { return a; },
        std::move(name));
}

inline LipMap identity_lipmap(int n)
{
    return affine_lipmap(Mat::Identity(n, n), Vec::Zero(n), "identity");
}

inline LipMap translation_map(const Vec& c)
{
    const auto n = c.size();
    return affine_lipmap(Mat::Identity(n, n), c, "translation");
}

/// Rotation by `angle` in the (i, j) coordinate plane about `center`.
inline LipMap rotation_map(double angle, const Vec& center, int i = 0, int j = 1)
{
    const auto n = center.size();
    Mat r = Mat::Identity(n, n);
    r(i, i) = std::cos(angle);
    r(i, j) = -std::sin(angle);
    r(j, i) = std::sin(angle);
    r(j, j) = std::cos(angle);
    return affine_lipmap(r, center - r * center, "rotation");
}

/// x -> x + k x_j e_i.
inline LipMap shear_map(int n, double k, int i = 0, int j = 1)
{
    Mat a = Mat::Identity(n, n);
    a(i, j) += k;
    return affine_lipmap(a, Vec::Zero(n), "shear");
}

/// x -> c + g(|x - c|) (x - c) / |x - c| with g(s) = s (1 + k s): a smooth
/// radial stretch for k > -1 / (2 R) on the ball of radius R.
inline LipMap radial_stretch_map(const Vec& c, double k)
{
    const auto n = c.size();
    return LipMap(
        static_cast<int>(n), [c, k](const Vec& x) -> Vec { return c + (1.0 + k * (x - c).norm()) * (x - c); },
        [c, k, n](const Vec& x) -> Mat {
            Vec u = x - c;
            double s = u.norm();
            Mat j = (1.0 + k * s) * Mat::Identity(n, n);
            if (s > 0.0) j += k * u * u.transpose() / s;
            return j;
        },
        "radial_stretch");
}

/// Piecewise-linear tent x -> x + a h(x) d with the pyramid
/// h(x) = max(0, 1 - |x - c|_inf / w): Lipschitz, not differentiable on the
/// diagonals and the boundary of the support square. Identity outside
/// the box c +- w.
inline LipMap tent_map(const Vec& c, double w, double a, const Vec& d)
{
    const auto n = c.size();
    auto h = [c, w](const Vec& x) { return std::max(0.0, 1.0 - (x - c).cwiseAbs().maxCoeff() / w); };
    auto grad = [c, w, n](const Vec& x) {
        Vec g = Vec::Zero(n);
        Vec u = x - c;
        if (u.cwiseAbs().maxCoeff() >= w) return g;
        Eigen::Index k;
        u.cwiseAbs().maxCoeff(&k);
        g[k] = (u[k] >= 0 ? -1.0 : 1.0) / w;
        return g;
    };
    LipMap m(
        static_cast<int>(n), [h, a, d](const Vec& x) -> Vec { return x + a * h(x) * d; },
        [grad, a, d, n](const Vec& x) -> Mat { return Mat::Identity(n, n) + a * d * grad(x).transpose(); }, "tent");
    m.identity_outside(Box(c.array() - w, c.array() + w));
    return m;
}

/// The fold x -> |x| coordinatewise in the first axis (not injective).
inline LipMap fold_map(int n)
{
    return LipMap(
        n,
        [](const Vec& x) -> Vec {
            Vec y = x;
            y[0] = std::abs(y[0]);
            return y;
        },
        {}, "fold");
}

/// g o f, with the chain-rule Jacobian when both factors have one.
inline LipMap compose(const LipMap& g, const LipMap& f)
{
    LipMap::Jacobian jac;
    if (g.has_jacobian() && f.has_jacobian()) jac = [g, f](const Vec& x) -> Mat { return g.jacobian(f(x)) * f.jacobian(x); };
    return LipMap(
        f.dim(), [g, f](const Vec& x) { return g(f(x)); }, jac, g.name() + "_o_" + f.name());
}

} // namespace currentkit

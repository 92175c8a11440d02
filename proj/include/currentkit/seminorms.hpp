#pragma once

// Grid estimates of the K-comass, K-flat and sharp seminorms of form fields.

#include "form_field.hpp"

#include <random>

namespace currentkit {

struct SeminormOptions {
    /// Points per axis; dyadic values 2^k + 1 give nested grids.
    int resolution = 33;
    /// Use every grid pair for Lipschitz estimates up to this many pairs;
    /// beyond it, `random_pairs` random pairs plus all neighbor pairs.
    std::size_t all_pairs_limit = 600000;
    std::size_t random_pairs = 100000;
    std::uint64_t seed = 42;
    ComassOptions comass{};
};

struct GridEstimate {
    double value = 0.0;
    int resolution = 0;
    std::size_t samples = 0;
};

namespace detail {

inline double pointwise_comass(const CoVector& c, const ComassOptions& opts)
{
    return comass(c, opts).value;
}

/// Norm used for differences in Lipschitz estimates. The Euclidean norm equals
/// the comass for r in {0, 1, n-1, n} and bounds it from above otherwise.
inline double lipschitz_norm(const CoVector& c)
{
    return euclidean_norm(c);
}

/// Operator norm of u -> D_u phi(x), as the spectral norm of the C(n,r) x n
/// matrix of partial derivatives.
inline double derivative_norm(const FormField& phi, const Vec& x)
{
    const int n = phi.ambient();
    Mat d(static_cast<Eigen::Index>(binomial(n, phi.degree())), n);
    for (int j = 0; j < n; ++j) {
        CoVector dj(phi.degree(), n);
        if (phi.is_polynomial()) {
            const auto& p = phi.polynomial_form();
            for (std::size_t l = 0; l < p.size(); ++l) dj[l] = p.component(l).derivative(j)(x);
        } else {
            dj = partial_fd(phi, x, j, phi.fd_step());
        }
        for (std::size_t l = 0; l < dj.size(); ++l) d(static_cast<Eigen::Index>(l), j) = dj[l];
    }
    if (d.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(d);
    return svd.singularValues()(0);
}

} // namespace detail

/// M_K(phi): maximum pointwise comass over the grid on K.
inline GridEstimate seminorm_comass(const FormField& phi, const Box& k, const SeminormOptions& opts = {})
{
    GridEstimate e;
    e.resolution = opts.resolution;
    for (const auto& x : grid_points(k, opts.resolution)) {
        e.value = std::max(e.value, detail::pointwise_comass(phi(x), opts.comass));
        ++e.samples;
    }
    return e;
}

/// F_K(phi) = max(M_K(phi), M_K(d phi)).
inline GridEstimate seminorm_flat(const FormField& phi, const Box& k, const SeminormOptions& opts = {})
{
    GridEstimate e = seminorm_comass(phi, k, opts);
    if (phi.degree() < phi.ambient()) {
        GridEstimate d = seminorm_comass(exterior_derivative(phi), k, opts);
        e.value = std::max(e.value, d.value);
        e.samples += d.samples;
    }
    return e;
}

/// Lip_{phi,K}: the larger of the secant estimate over grid pairs and the
/// largest derivative norm at grid points. The derivative term bounds the
/// local Lipschitz constant from the inside of each cell, which keeps
/// (r+1) * Lip >= M_K(d phi) on the same grid.
inline GridEstimate lipschitz_form(const FormField& phi, const Box& k, const SeminormOptions& opts = {})
{
    GridEstimate e;
    e.resolution = opts.resolution;
    const auto pts = grid_points(k, opts.resolution);
    std::vector<CoVector> vals;
    vals.reserve(pts.size());
    for (const auto& x : pts) vals.push_back(phi(x));

    auto secant = [&](std::size_t i, std::size_t j) {
        double dist = (pts[i] - pts[j]).norm();
        if (dist <= 0.0) return;
        e.value = std::max(e.value, detail::lipschitz_norm(vals[i] - vals[j]) / dist);
        ++e.samples;
    };
    const std::size_t np = pts.size();
    if (np * (np - 1) / 2 <= opts.all_pairs_limit) {
        for (std::size_t i = 0; i < np; ++i)
            for (std::size_t j = i + 1; j < np; ++j) secant(i, j);
    } else {
        std::mt19937_64 rng(opts.seed);
        std::uniform_int_distribution<std::size_t> pick(0, np - 1);
        for (std::size_t s = 0; s < opts.random_pairs; ++s) secant(pick(rng), pick(rng));
        for (auto [i, j] : grid_neighbor_pairs(k.dim(), opts.resolution)) secant(i, j);
    }
    for (const auto& x : pts) e.value = std::max(e.value, detail::derivative_norm(phi, x));
    return e;
}

/// S_K(phi) = max(M_K(phi), (r + 1) Lip_{phi,K}).
inline GridEstimate seminorm_sharp(const FormField& phi, const Box& k, const SeminormOptions& opts = {})
{
    GridEstimate m = seminorm_comass(phi, k, opts);
    GridEstimate l = lipschitz_form(phi, k, opts);
    GridEstimate e;
    e.resolution = opts.resolution;
    e.value = std::max(m.value, (phi.degree() + 1) * l.value);
    e.samples = m.samples + l.samples;
    return e;
}

/// sup_K |v| and a Lipschitz estimate (secants over neighbor pairs plus
/// Jacobian norms for polynomial fields).
inline GridEstimate sup_norm(const VectorField& v, const Box& k, int resolution = 33)
{
    GridEstimate e;
    e.resolution = resolution;
    for (const auto& x : grid_points(k, resolution)) {
        e.value = std::max(e.value, v(x).norm());
        ++e.samples;
    }
    return e;
}

inline GridEstimate lipschitz_field(const VectorField& v, const Box& k, int resolution = 33)
{
    GridEstimate e;
    e.resolution = resolution;
    const auto pts = grid_points(k, resolution);
    std::vector<Vec> vals;
    for (const auto& x : pts) vals.push_back(v(x));
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size() && pts.size() <= 2000; ++j) {
            e.value = std::max(e.value, (vals[i] - vals[j]).norm() / (pts[i] - pts[j]).norm());
            ++e.samples;
        }
    for (auto [i, j] : grid_neighbor_pairs(k.dim(), resolution)) {
        e.value = std::max(e.value, (vals[i] - vals[j]).norm() / (pts[i] - pts[j]).norm());
        ++e.samples;
    }
    if (v.is_polynomial()) {
        const auto& p = v.polynomial_map();
        const int n = v.dim();
        for (const auto& x : pts) {
            Mat jac(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) jac(i, j) = p[static_cast<std::size_t>(i)].derivative(j)(x);
            Eigen::JacobiSVD<Mat> svd(jac);
            e.value = std::max(e.value, svd.singularValues()(0));
        }
    }
    return e;
}

/// ||v||_{Lip,K} = max(sup_K |v|, Lip_{v,K}).
inline double lipschitz_norm_field(const VectorField& v, const Box& k, int resolution = 33)
{
    return std::max(sup_norm(v, k, resolution).value, lipschitz_field(v, k, resolution).value);
}

/// The constant in M_K(L_v phi) <= C(n, r) S_K(phi) ||v||_{Lip,K}: one term for
/// the transport part plus C(n, r) r (n - r + 1) deformation terms, each
/// bounded by the Lipschitz part of S_K divided by (r + 1).
inline double lie_bound_constant(int n, int r)
{
    return 1.0 / (r + 1) + static_cast<double>(binomial(n, r)) * r * (n - r + 1);
}

} // namespace currentkit

#pragma once

// Quadrature on intervals and simplices. Simplex rules are stored in
// barycentric coordinates with weights summing to 1; callers scale by volume.

#include "core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <vector>

namespace currentkit {

struct Rule1D {
    std::vector<double> nodes;   // on [0, 1]
    std::vector<double> weights; // sum 1
};

/// Gauss-Jacobi rule for the weight (1 - x)^alpha (1 + x)^beta on [-1, 1],
/// via the Golub-Welsch eigenvalue method, remapped to [0, 1] with weights
/// normalized to sum 1.
inline Rule1D gauss_jacobi(int points, double alpha, double beta)
{
    if (points < 1) throw Error("gauss_jacobi: need at least one point");
    const int m = points;
    Mat jm = Mat::Zero(m, m);
    const double ab = alpha + beta;
    for (int j = 0; j < m; ++j) {
        double denom = (2.0 * j + ab) * (2.0 * j + ab + 2.0);
        jm(j, j) = (j == 0) ? (beta - alpha) / (ab + 2.0) : (beta * beta - alpha * alpha) / denom;
        if (j + 1 < m) {
            const double k = j + 1;
            const double s = 2.0 * k + ab;
            double b2 = 4.0 * k * (k + alpha) * (k + beta) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0));
            jm(j, j + 1) = jm(j + 1, j) = std::sqrt(b2);
        }
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(jm);
    Rule1D r;
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
        double v0 = es.eigenvectors()(0, i);
        r.nodes.push_back(0.5 * (es.eigenvalues()[i] + 1.0));
        r.weights.push_back(v0 * v0);
        total += v0 * v0;
    }
    for (auto& w : r.weights) w /= total;
    return r;
}

inline const Rule1D& gauss_legendre(int points)
{
    static std::mutex mu;
    static std::map<int, Rule1D> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(points);
    if (it == cache.end()) it = cache.emplace(points, gauss_jacobi(points, 0.0, 0.0)).first;
    return it->second;
}

struct SimplexRule {
    int dim = 0;
    std::vector<std::vector<double>> bary; // dim + 1 coordinates per node
    std::vector<double> weights;           // sum 1
};

namespace detail {

inline SimplexRule dunavant_degree4()
{
    SimplexRule r;
    r.dim = 2;
    const double a1 = 0.445948490915965, w1 = 0.223381589678011;
    const double a2 = 0.091576213509771, w2 = 0.109951743655322;
    for (auto [a, w] : {std::pair{a1, w1}, std::pair{a2, w2}}) {
        const double b = 1.0 - 2.0 * a;
        r.bary.push_back({b, a, a});
        r.bary.push_back({a, b, a});
        r.bary.push_back({a, a, b});
        r.weights.insert(r.weights.end(), 3, w);
    }
    double s = std::accumulate(r.weights.begin(), r.weights.end(), 0.0);
    for (auto& w : r.weights) w /= s;
    return r;
}

/// Collapsed-coordinate (conical product) rule with `m` points per direction:
/// exact for polynomials of degree 2m - 1.
inline SimplexRule conical_product(int dim, int m)
{
    std::vector<Rule1D> axes;
    for (int k = 0; k < dim; ++k) axes.push_back(gauss_jacobi(m, static_cast<double>(dim - 1 - k), 0.0));
    SimplexRule r;
    r.dim = dim;
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    while (true) {
        // x_k = u_k * prod_{j<k} (1 - u_j); barycentric l_0 = 1 - sum x.
        std::vector<double> bary(static_cast<std::size_t>(dim) + 1, 0.0);
        double remaining = 1.0, w = 1.0;
        for (int k = 0; k < dim; ++k) {
            double u = axes[static_cast<std::size_t>(k)].nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
            w *= axes[static_cast<std::size_t>(k)].weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
            bary[static_cast<std::size_t>(k) + 1] = u * remaining;
            remaining *= (1.0 - u);
        }
        bary[0] = remaining;
        r.bary.push_back(std::move(bary));
        r.weights.push_back(w);
        int k = dim - 1;
        while (k >= 0 && ++idx[static_cast<std::size_t>(k)] == m) idx[static_cast<std::size_t>(k--)] = 0;
        if (k < 0) break;
    }
    double s = std::accumulate(r.weights.begin(), r.weights.end(), 0.0);
    for (auto& w : r.weights) w /= s;
    return r;
}

} // namespace detail

/// Default rule of polynomial exactness >= 4 on the reference `dim`-simplex.
inline const SimplexRule& simplex_rule(int dim)
{
    static std::mutex mu;
    static std::map<int, SimplexRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(dim);
    if (it != cache.end()) return it->second;
    SimplexRule r;
    if (dim == 0) {
        r.bary = {{1.0}};
        r.weights = {1.0};
    } else if (dim == 1) {
        const auto& gl = gauss_legendre(3);
        r.dim = 1;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            r.bary.push_back({1.0 - gl.nodes[i], gl.nodes[i]});
            r.weights.push_back(gl.weights[i]);
        }
    } else if (dim == 2) {
        r = detail::dunavant_degree4();
    } else {
        r = detail::conical_product(dim, 3);
    }
    return cache.emplace(dim, std::move(r)).first->second;
}

} // namespace currentkit

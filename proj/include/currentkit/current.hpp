#pragma once

// Currents as immutable expression trees over simplicial chains. Evaluation
// against a form integrates over the leaves with the default simplex rule
// after `levels` edgewise subdivisions.

#include "chain.hpp"
#include "form_field.hpp"

#include <functional>
#include <memory>
#include <mutex>
#include <string>

namespace currentkit {

struct EvalOptions {
    /// Edgewise subdivisions applied to leaf chains before quadrature.
    int levels = 0;
};

class Current;

/// Arbitrary linear functional on r-forms (pushforwards, deformation chains).
struct Functional {
    std::string label;
    std::function<double(const FormField&, const EvalOptions&)> eval;
};

namespace detail {

/// Quadrature nodes of a chain paired with weighted tangents:
///   T(phi) ~ sum_k <phi(x_k), xi_k>.
struct QuadratureData {
    std::vector<Vec> nodes;
    std::vector<MultiVector> weighted_tangents;
};

inline QuadratureData build_quadrature(const Chain& c, int levels)
{
    QuadratureData q;
    Chain fine = subdivide(c, levels);
    const auto& rule = simplex_rule(fine.degree());
    for (const auto& [idx, m] : fine.term_map()) {
        auto pts = fine.points(idx);
        MultiVector tau = unit_tangent(pts);
        const double scale = m * simplex_volume(pts);
        for (std::size_t k = 0; k < rule.weights.size(); ++k) {
            Vec x = Vec::Zero(fine.ambient());
            for (std::size_t i = 0; i < pts.size(); ++i) x += rule.bary[k][i] * pts[i];
            q.nodes.push_back(std::move(x));
            q.weighted_tangents.push_back(tau * (scale * rule.weights[k]));
        }
    }
    return q;
}

struct LeafNode {
    Chain chain;
    mutable std::mutex mu;
    mutable std::map<int, std::shared_ptr<const QuadratureData>> cache;

    mutable std::shared_ptr<const LeafNode> boundary_leaf;

    explicit LeafNode(Chain c) : chain(std::move(c)) {}

    std::shared_ptr<const LeafNode> boundary_node() const
    {
        std::lock_guard<std::mutex> lock(mu);
        if (!boundary_leaf) boundary_leaf = std::make_shared<const LeafNode>(boundary(chain));
        return boundary_leaf;
    }

    double integrate(const FormField& phi, int levels) const
    {
        auto q = quadrature(levels);
        double s = 0.0;
        for (std::size_t k = 0; k < q->nodes.size(); ++k) s += pair(phi(q->nodes[k]), q->weighted_tangents[k]);
        return s;
    }

    std::shared_ptr<const QuadratureData> quadrature(int levels) const
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(levels);
        if (it == cache.end())
            it = cache.emplace(levels, std::make_shared<const QuadratureData>(build_quadrature(chain, levels))).first;
        return it->second;
    }
};

} // namespace detail

class Current {
public:
    enum class Kind { Leaf, Boundary, VWedge, Sum, Functional };

    Current() = default;

    /// Current of integration over a chain.
    static Current leaf(Chain c)
    {
        Current t;
        t.degree_ = c.degree();
        t.ambient_ = c.ambient();
        t.node_ = std::make_shared<const Node>(Node{Kind::Leaf, std::make_shared<const detail::LeafNode>(std::move(c)), {}, {}, {}});
        return t;
    }

    static Current functional(int degree, int ambient, Functional f)
    {
        Current t;
        t.degree_ = degree;
        t.ambient_ = ambient;
        t.node_ = std::make_shared<const Node>(Node{Kind::Functional, nullptr, {}, {}, std::move(f)});
        return t;
    }

    static Current zero(int degree, int ambient)
    {
        Current t;
        t.degree_ = degree;
        t.ambient_ = ambient;
        t.node_ = std::make_shared<const Node>(Node{Kind::Sum, nullptr, {}, {}, {}});
        return t;
    }

    int degree() const { return degree_; }
    int ambient() const { return ambient_; }
    Kind kind() const { return node_->kind; }
    bool is_leaf() const { return node_ && node_->kind == Kind::Leaf; }
    const Chain& chain() const
    {
        if (!is_leaf()) throw Error("current is not a chain leaf");
        return node_->leaf->chain;
    }

    friend Current boundary(const Current& t);
    friend Current v_wedge(const VectorField& v, const Current& t);
    friend Current operator+(const Current& a, const Current& b);
    friend Current operator*(double s, const Current& a);
    friend double evaluate(const Current& t, const FormField& phi, const EvalOptions& opts);

private:
    struct Node {
        Kind kind;
        std::shared_ptr<const detail::LeafNode> leaf;
        std::vector<std::pair<double, Current>> terms; // Sum; single child for Boundary / VWedge
        std::optional<VectorField> field;
        Functional functional;
    };

    int degree_ = 0;
    int ambient_ = 0;
    std::shared_ptr<const Node> node_;
};

inline Current boundary(const Current& t)
{
    if (t.degree() < 1) throw DegreeError("boundary of a 0-current");
    Current b;
    b.degree_ = t.degree() - 1;
    b.ambient_ = t.ambient();
    b.node_ = std::make_shared<const Current::Node>(Current::Node{Current::Kind::Boundary, nullptr, {{1.0, t}}, {}, {}});
    return b;
}

/// v ^ T, defined by (v ^ T)(phi) = T(phi -| v). Only evaluation is provided.
inline Current v_wedge(const VectorField& v, const Current& t)
{
    if (t.degree() + 1 > t.ambient()) throw DegreeError("v ^ T would exceed the ambient dimension");
    if (v.dim() != t.ambient()) throw DegreeError("v ^ T: vector field dimension mismatch");
    Current w;
    w.degree_ = t.degree() + 1;
    w.ambient_ = t.ambient();
    w.node_ = std::make_shared<const Current::Node>(Current::Node{Current::Kind::VWedge, nullptr, {{1.0, t}}, v, {}});
    return w;
}

inline Current operator+(const Current& a, const Current& b)
{
    if (a.degree() != b.degree() || a.ambient() != b.ambient()) throw DegreeError("current sum: degree mismatch");
    Current s;
    s.degree_ = a.degree();
    s.ambient_ = a.ambient();
    s.node_ = std::make_shared<const Current::Node>(Current::Node{Current::Kind::Sum, nullptr, {{1.0, a}, {1.0, b}}, {}, {}});
    return s;
}

inline Current operator*(double k, const Current& a)
{
    Current s;
    s.degree_ = a.degree();
    s.ambient_ = a.ambient();
    s.node_ = std::make_shared<const Current::Node>(Current::Node{Current::Kind::Sum, nullptr, {{k, a}}, {}, {}});
    return s;
}

inline Current operator-(const Current& a, const Current& b)
{
    return a + (-1.0) * b;
}

/// T(phi). Boundaries use the exact d phi for polynomial forms; for sampled
/// forms a boundary of a chain is evaluated on the simplicial boundary chain,
/// and any other boundary falls back to the finite-difference d phi.
inline double evaluate(const Current& t, const FormField& phi, const EvalOptions& opts = {})
{
    if (phi.degree() != t.degree() || phi.ambient() != t.ambient()) throw DegreeError("evaluate: form and current degrees differ");
    const auto& node = *t.node_;
    switch (node.kind) {
    case Current::Kind::Leaf:
        return node.leaf->integrate(phi, opts.levels);
    case Current::Kind::Boundary: {
        const Current& child = node.terms.front().second;
        if (!phi.is_polynomial() && child.is_leaf()) return child.node_->leaf->boundary_node()->integrate(phi, opts.levels);
        return evaluate(child, exterior_derivative(phi), opts);
    }
    case Current::Kind::VWedge:
        return evaluate(node.terms.front().second, contract(phi, *node.field), opts);
    case Current::Kind::Sum: {
        double s = 0.0;
        for (const auto& [k, c] : node.terms) s += k * evaluate(c, phi, opts);
        return s;
    }
    case Current::Kind::Functional:
        return node.functional.eval(phi, opts);
    }
    return 0.0;
}

inline double evaluate(const Chain& c, const FormField& phi, const EvalOptions& opts = {})
{
    return evaluate(Current::leaf(c), phi, opts);
}

struct EvaluationWithError {
    double value = 0.0;
    double error = 0.0;
};

/// Evaluates at `levels` and `levels + 1`; the difference estimates the
/// quadrature error of the finer value.
inline EvaluationWithError evaluate_with_error(const Current& t, const FormField& phi, int levels = 0)
{
    double coarse = evaluate(t, phi, {levels});
    double fine = evaluate(t, phi, {levels + 1});
    return {fine, std::abs(fine - coarse)};
}

/// The slice omega(t, .) -| e_t of a form on R x R^n (time is coordinate 0),
/// as an r-form on R^n.
inline FormField time_slice_contraction(const FormField& omega, double t)
{
    const int n = omega.ambient() - 1;
    if (omega.degree() < 1) throw DegreeError("interval product needs a form of degree >= 1");
    return FormField::sampled(
        omega.degree() - 1, n,
        [omega, t, n](const Vec& x) {
            Vec tx(n + 1);
            tx[0] = t;
            tx.tail(n) = x;
            Vec et = Vec::Zero(n + 1);
            et[0] = 1.0;
            CoVector full = interior_product(omega.raw(tx), et);
            // Drop the dt components: basis masks without bit 0, shifted down.
            const auto& tab = detail::basis_table(n + 1);
            CoVector out(full.degree(), n);
            const auto& masks = tab.masks[static_cast<std::size_t>(full.degree())];
            for (std::size_t l = 0; l < masks.size(); ++l) {
                if (masks[l] & 1u) continue;
                out[static_cast<std::size_t>(detail::basis_table(n).rank_of_mask[masks[l] >> 1])] = full[l];
            }
            return out;
        });
}

/// ([a, b] x T)(omega) = int_a^b T(omega(t, .) -| e_t) dt, by composite
/// 5-point Gauss-Legendre in t.
inline double interval_product_evaluate(double a, double b, const Chain& t, const FormField& omega, int panels = 4,
                                        const EvalOptions& opts = {})
{
    if (omega.ambient() != t.ambient() + 1 || omega.degree() != t.degree() + 1)
        throw DegreeError("interval product: form must be an (r+1)-form on R x R^n");
    if (a == b) return 0.0;
    const auto& gl = gauss_legendre(5);
    Current leaf = Current::leaf(t);
    double sum = 0.0;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
            double tau = a + h * (p + gl.nodes[k]);
            sum += h * gl.weights[k] * evaluate(leaf, time_slice_contraction(omega, tau), opts);
        }
    }
    return sum;
}

} // namespace currentkit

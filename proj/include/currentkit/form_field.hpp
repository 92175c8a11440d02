#pragma once

// Differential form fields and vector fields with two backends: exact
// polynomial data, or a sampled evaluator with finite-difference derivatives.

#include "box.hpp"
#include "poly_form.hpp"
#include "quadrature.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace currentkit {

class VectorField {
public:
    using Eval = std::function<Vec(const Vec&)>;

    VectorField() = default;

    VectorField(int dim, Eval f) : dim_(dim), eval_(std::move(f))
    {
        if (!eval_) throw Error("vector field needs an evaluator");
    }

    static VectorField constant(const Vec& c)
    {
        PolyMap<double> p;
        const int n = static_cast<int>(c.size());
        for (int i = 0; i < n; ++i) p.push_back(Polynomial<double>::constant(n, c[i]));
        auto v = polynomial(std::move(p));
        v.lipschitz_ = 0.0;
        return v;
    }

    static VectorField zero(int n) { return constant(Vec::Zero(n)); }

    static VectorField polynomial(PolyMap<double> p)
    {
        const int n = static_cast<int>(p.size());
        for (const auto& c : p)
            if (c.num_vars() != n) throw Error("polynomial vector field must map R^n to R^n");
        VectorField v;
        v.dim_ = n;
        auto shared = std::make_shared<const PolyMap<double>>(std::move(p));
        v.poly_ = shared;
        v.eval_ = [shared](const Vec& x) {
            Vec out(static_cast<Eigen::Index>(shared->size()));
            for (std::size_t i = 0; i < shared->size(); ++i) out[static_cast<Eigen::Index>(i)] = (*shared)[i](x);
            return out;
        };
        return v;
    }

    int dim() const { return dim_; }
    bool is_polynomial() const { return poly_ != nullptr; }
    const PolyMap<double>& polynomial_map() const
    {
        if (!poly_) throw Error("vector field has no polynomial backend");
        return *poly_;
    }

    std::optional<double> known_lipschitz() const { return lipschitz_; }
    VectorField& set_lipschitz(double l)
    {
        lipschitz_ = l;
        return *this;
    }

    Vec operator()(const Vec& x) const
    {
        Vec v = eval_(x);
        if (v.size() != dim_) throw DegreeError("vector field returned a vector of the wrong dimension");
        return v;
    }

    const Eval& evaluator() const { return eval_; }

private:
    int dim_ = 0;
    Eval eval_;
    std::shared_ptr<const PolyMap<double>> poly_;
    std::optional<double> lipschitz_;
};

class FormField {
public:
    using Eval = std::function<CoVector(const Vec&)>;

    FormField() = default;

    static FormField polynomial(PolyForm<double> p, std::optional<Box> domain = std::nullopt)
    {
        FormField f;
        f.degree_ = p.degree();
        f.ambient_ = p.ambient();
        f.domain_ = std::move(domain);
        f.poly_ = std::make_shared<const PolyForm<double>>(std::move(p));
        return f;
    }

    /// Black-box form. `fd_step <= 0` selects 1e-5 times the domain diameter.
    static FormField sampled(int degree, int ambient, Eval f, std::optional<Box> domain = std::nullopt, double fd_step = 0.0)
    {
        if (!f) throw Error("sampled form needs an evaluator");
        if (degree < 0 || degree > ambient || ambient > kMaxAmbient) throw DegreeError("form degree out of range");
        FormField out;
        out.degree_ = degree;
        out.ambient_ = ambient;
        out.domain_ = std::move(domain);
        out.eval_ = std::move(f);
        out.fd_step_ = fd_step > 0.0 ? fd_step : 1e-5 * (out.domain_ ? out.domain_->diameter() : 1.0);
        return out;
    }

    /// The constant form c * dx^idx.
    static FormField constant(const MultiIndex& idx, double c = 1.0)
    {
        return polynomial(PolyForm<double>::basis(idx, Polynomial<double>::constant(idx.ambient(), c)));
    }

    int degree() const { return degree_; }
    int ambient() const { return ambient_; }
    const std::optional<Box>& domain() const { return domain_; }
    double fd_step() const { return fd_step_; }

    bool is_polynomial() const { return poly_ != nullptr; }
    const PolyForm<double>& polynomial_form() const
    {
        if (!poly_) throw Error("form has no polynomial backend");
        return *poly_;
    }

    FormField with_domain(std::optional<Box> d) const
    {
        FormField f = *this;
        f.domain_ = std::move(d);
        return f;
    }

    CoVector operator()(const Vec& x) const
    {
        if (x.size() != ambient_) throw DegreeError("form evaluated at a point of the wrong dimension");
        if (domain_ && !domain_->contains(x, 1e-9 * domain_->diameter()))
            throw DomainError("point outside the domain of the form");
        return raw(x);
    }

    /// Evaluation without the domain check (finite-difference stencils may
    /// step slightly outside a closed box).
    CoVector raw(const Vec& x) const
    {
        if (poly_) return (*poly_)(x);
        CoVector c = eval_(x);
        if (c.degree() != degree_ || c.ambient() != ambient_) throw DegreeError("sampled form returned wrong degree");
        return c;
    }

private:
    int degree_ = 0;
    int ambient_ = 0;
    std::optional<Box> domain_;
    std::shared_ptr<const PolyForm<double>> poly_;
    Eval eval_;
    double fd_step_ = 1e-5;
};

inline FormField operator+(const FormField& a, const FormField& b)
{
    if (a.degree() != b.degree() || a.ambient() != b.ambient()) throw DegreeError("form sum: degree mismatch");
    if (a.is_polynomial() && b.is_polynomial())
        return FormField::polynomial(a.polynomial_form() + b.polynomial_form(), a.domain() ? a.domain() : b.domain());
    return FormField::sampled(
        a.degree(), a.ambient(), [a, b](const Vec& x) { return a.raw(x) + b.raw(x); }, a.domain() ? a.domain() : b.domain(),
        std::max(a.fd_step(), b.fd_step()));
}

inline FormField operator*(double s, const FormField& a)
{
    if (a.is_polynomial()) return FormField::polynomial(a.polynomial_form() * s, a.domain());
    return FormField::sampled(
        a.degree(), a.ambient(), [a, s](const Vec& x) { return a.raw(x) * s; }, a.domain(), a.fd_step());
}

inline FormField operator-(const FormField& a, const FormField& b)
{
    return a + (-1.0) * b;
}

namespace detail {

/// Partial derivative of a sampled form along axis j by central differences.
inline CoVector partial_fd(const FormField& phi, const Vec& x, int j, double h)
{
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    return (phi.raw(xp) - phi.raw(xm)) * (0.5 / h);
}

} // namespace detail

/// d phi. Exact for polynomial forms; central differences with the form's step otherwise.
inline FormField exterior_derivative(const FormField& phi)
{
    if (phi.degree() >= phi.ambient()) throw DegreeError("exterior derivative of a top-degree form");
    if (phi.is_polynomial()) return FormField::polynomial(exterior_derivative(phi.polynomial_form()), phi.domain());
    const int n = phi.ambient();
    return FormField::sampled(
        phi.degree() + 1, n,
        [phi, n](const Vec& x) {
            CoVector out(phi.degree() + 1, n);
            for (int j = 0; j < n; ++j) {
                CoVector dj = detail::partial_fd(phi, x, j, phi.fd_step());
                out += wedge(CoVector::unit(MultiIndex({j}, n)), dj);
            }
            return out;
        },
        phi.domain(), phi.fd_step());
}

/// Pointwise phi -| v.
inline FormField contract(const FormField& phi, const VectorField& v)
{
    if (phi.degree() < 1) throw DegreeError("contraction of a 0-form");
    if (v.dim() != phi.ambient()) throw DegreeError("contraction: vector field dimension mismatch");
    if (phi.is_polynomial() && v.is_polynomial())
        return FormField::polynomial(contract(phi.polynomial_form(), v.polynomial_map()), phi.domain());
    return FormField::sampled(
        phi.degree() - 1, phi.ambient(), [phi, v](const Vec& x) { return interior_product(phi.raw(x), v(x)); },
        phi.domain(), phi.fd_step());
}

/// L_v phi by Cartan's formula; exact when both inputs are polynomial.
inline FormField lie_derivative(const FormField& phi, const VectorField& v)
{
    if (v.dim() != phi.ambient()) throw DegreeError("Lie derivative: vector field dimension mismatch");
    if (phi.is_polynomial() && v.is_polynomial())
        return FormField::polynomial(lie_derivative(phi.polynomial_form(), v.polynomial_map()), phi.domain());
    const int r = phi.degree();
    const int n = phi.ambient();
    std::optional<FormField> out;
    if (r >= 1) out = exterior_derivative(contract(phi, v));
    if (r < n) {
        FormField second = contract(exterior_derivative(phi), v);
        out = out ? *out + second : second;
    }
    return *out;
}

/// f^# phi for a map with Jacobian; `jac` may be empty, in which case central
/// differences with step 1e-6 are used.
inline FormField pullback(const FormField& phi, std::function<Vec(const Vec&)> f, std::function<Mat(const Vec&)> jac,
                          int source_dim, std::optional<Box> source_domain = std::nullopt)
{
    if (phi.degree() > source_dim) throw DegreeError("pullback: degree exceeds source dimension");
    if (!jac) {
        jac = [f, source_dim](const Vec& x) {
            const double h = 1e-6;
            Mat j;
            for (int k = 0; k < source_dim; ++k) {
                Vec xp = x, xm = x;
                xp[k] += h;
                xm[k] -= h;
                Vec col = (f(xp) - f(xm)) / (2 * h);
                if (k == 0) j.resize(col.size(), source_dim);
                j.col(k) = col;
            }
            return j;
        };
    }
    return FormField::sampled(
        phi.degree(), source_dim, [phi, f, jac](const Vec& x) { return pullback_covector(phi(f(x)), jac(x)); },
        std::move(source_domain));
}

/// Exact pullback of a polynomial form under a polynomial map.
inline FormField pullback(const FormField& phi, const PolyMap<double>& f, std::optional<Box> source_domain = std::nullopt)
{
    return FormField::polynomial(pullback(phi.polynomial_form(), f), std::move(source_domain));
}

enum class KernelType { Gaussian, Bump };

/// Separable mollifier on the cube [-rho, rho]^n, discretized by tensor
/// Gauss-Legendre nodes with weights normalized to unit mass.
struct Mollifier {
    double radius = 1e-2;
    KernelType kernel = KernelType::Gaussian;
    int nodes_per_axis = 8;

    double profile(double s) const // s in [-1, 1]
    {
        if (kernel == KernelType::Gaussian) return std::exp(-4.5 * s * s);
        return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
    }

    std::vector<std::pair<Vec, double>> stencil(int n) const
    {
        if (!(radius > 0.0)) throw Error("mollifier radius must be positive");
        const auto& gl = gauss_legendre(nodes_per_axis);
        std::vector<double> z, w;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            double s = 2.0 * gl.nodes[i] - 1.0;
            z.push_back(radius * s);
            w.push_back(gl.weights[i] * profile(s));
        }
        std::vector<std::pair<Vec, double>> out;
        std::vector<int> idx(static_cast<std::size_t>(n), 0);
        const int m = nodes_per_axis;
        double total = 0.0;
        while (true) {
            Vec p(n);
            double wt = 1.0;
            for (int i = 0; i < n; ++i) {
                p[i] = z[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
                wt *= w[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
            }
            out.emplace_back(p, wt);
            total += wt;
            int i = n - 1;
            while (i >= 0 && ++idx[static_cast<std::size_t>(i)] == m) idx[static_cast<std::size_t>(i--)] = 0;
            if (i < 0) break;
        }
        for (auto& [p, wt] : out) wt /= total;
        return out;
    }
};

/// x -> sum_k w_k f(x - z_k).
inline std::function<Vec(const Vec&)> mollify_function(std::function<Vec(const Vec&)> f, int n, const Mollifier& m)
{
    auto st = std::make_shared<const std::vector<std::pair<Vec, double>>>(m.stencil(n));
    return [f = std::move(f), st](const Vec& x) {
        Vec acc;
        for (const auto& [z, w] : *st) {
            Vec y = f(x - z);
            if (acc.size() == 0) acc = Vec::Zero(y.size());
            acc += w * y;
        }
        return acc;
    };
}

/// Contraction with a merely Lipschitz field, taken as the limit of contractions
/// with mollified fields: evaluated at radii 4h, 2h, h and extrapolated assuming
/// an O(rho^2) error (symmetric kernel).
inline FormField contract_mollified(const FormField& phi, const VectorField& v, double h,
                                    KernelType kernel = KernelType::Gaussian)
{
    const int n = phi.ambient();
    std::vector<VectorField> fields;
    for (double rho : {4 * h, 2 * h, h}) {
        Mollifier m{rho, kernel, 8};
        fields.emplace_back(n, mollify_function(v.evaluator(), n, m));
    }
    return FormField::sampled(
        phi.degree() - 1, n,
        [phi, fields](const Vec& x) {
            CoVector form = phi.raw(x);
            CoVector c4 = interior_product(form, fields[0](x));
            CoVector c2 = interior_product(form, fields[1](x));
            CoVector c1 = interior_product(form, fields[2](x));
            // Two Richardson steps for rho^2 and rho^4 error terms.
            CoVector r21 = (c1 * 4.0 - c2) * (1.0 / 3.0);
            CoVector r42 = (c2 * 4.0 - c4) * (1.0 / 3.0);
            return (r21 * 16.0 - r42) * (1.0 / 15.0);
        },
        phi.domain(), phi.fd_step());
}

} // namespace currentkit

#pragma once

// Differential forms with polynomial coefficients. All operations here are
// exact in the coefficient ring, so identities such as d(d phi) = 0 or the
// Cartan formula can be checked with zero residual.

#include "exterior_algebra.hpp"
#include "polynomial.hpp"

namespace currentkit {

/// Polynomial map R^n -> R^m, one polynomial per output coordinate. With m == n
/// this doubles as a polynomial vector field.
template <class Scalar = double>
using PolyMap = std::vector<Polynomial<Scalar>>;

template <class Scalar = double>
class PolyForm {
public:
    using scalar_type = Scalar;

    PolyForm() = default;

    PolyForm(int degree, int ambient) : degree_(degree), ambient_(ambient)
    {
        if (ambient < 0 || ambient > kMaxAmbient || degree < 0 || degree > ambient)
            throw DegreeError("polynomial form degree out of range");
        comps_.assign(binomial(ambient, degree), Polynomial<Scalar>(ambient));
    }

    PolyForm(int degree, int ambient, std::vector<Polynomial<Scalar>> comps) : PolyForm(degree, ambient)
    {
        if (comps.size() != comps_.size()) throw DegreeError("component count does not match C(n, r)");
        for (const auto& p : comps)
            if (p.num_vars() != ambient) throw Error("component variable count must equal ambient dimension");
        comps_ = std::move(comps);
    }

    /// coeff * dx^idx
    static PolyForm basis(const MultiIndex& idx, Polynomial<Scalar> coeff)
    {
        PolyForm f(idx.degree(), idx.ambient());
        if (coeff.num_vars() != idx.ambient()) throw Error("coefficient variable count mismatch");
        f.comps_[idx.rank()] = std::move(coeff);
        return f;
    }

    int degree() const { return degree_; }
    int ambient() const { return ambient_; }
    std::size_t size() const { return comps_.size(); }

    const Polynomial<Scalar>& component(std::size_t rank) const { return comps_[rank]; }
    Polynomial<Scalar>& component(std::size_t rank) { return comps_[rank]; }
    const Polynomial<Scalar>& component(const MultiIndex& idx) const { return comps_.at(idx.rank()); }

    bool is_zero() const
    {
        for (const auto& p : comps_)
            if (!p.is_zero()) return false;
        return true;
    }

    int polynomial_degree() const
    {
        int d = 0;
        for (const auto& p : comps_) d = std::max(d, p.total_degree());
        return d;
    }

    PolyForm& operator+=(const PolyForm& o)
    {
        check(o);
        for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i] += o.comps_[i];
        return *this;
    }
    PolyForm& operator-=(const PolyForm& o)
    {
        check(o);
        for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i] -= o.comps_[i];
        return *this;
    }
    PolyForm& operator*=(const Scalar& s)
    {
        for (auto& p : comps_) p *= s;
        return *this;
    }

    friend PolyForm operator+(PolyForm a, const PolyForm& b) { return a += b; }
    friend PolyForm operator-(PolyForm a, const PolyForm& b) { return a -= b; }
    friend PolyForm operator-(PolyForm a) { return a *= Scalar(-1); }
    friend PolyForm operator*(PolyForm a, const Scalar& s) { return a *= s; }
    friend PolyForm operator*(const Scalar& s, PolyForm a) { return a *= s; }
    friend PolyForm operator*(const Polynomial<Scalar>& f, PolyForm a)
    {
        for (auto& p : a.comps_) p = f * p;
        return a;
    }
    friend bool operator==(const PolyForm&, const PolyForm&) = default;

    template <class T>
    CoVectorT<T> evaluate(std::span<const T> x) const
    {
        CoVectorT<T> out(degree_, ambient_);
        for (std::size_t i = 0; i < comps_.size(); ++i) out[i] = comps_[i].template evaluate<T>(x);
        return out;
    }

    CoVector operator()(const Vec& x) const
    {
        return evaluate<double>(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
    }

private:
    void check(const PolyForm& o) const
    {
        if (o.degree_ != degree_ || o.ambient_ != ambient_) throw DegreeError("polynomial form degree mismatch");
    }

    int degree_ = 0;
    int ambient_ = 0;
    std::vector<Polynomial<Scalar>> comps_{Polynomial<Scalar>(0)};
};

template <class Scalar>
PolyForm<Scalar> wedge(const PolyForm<Scalar>& a, const PolyForm<Scalar>& b)
{
    if (a.ambient() != b.ambient()) throw DegreeError("wedge: ambient mismatch");
    const int n = a.ambient();
    const int deg = a.degree() + b.degree();
    if (deg > n) throw DegreeError("wedge: degree overflow");
    const auto& tab = detail::basis_table(n);
    const auto& ma = tab.masks[static_cast<std::size_t>(a.degree())];
    const auto& mb = tab.masks[static_cast<std::size_t>(b.degree())];
    PolyForm<Scalar> out(deg, n);
    for (std::size_t i = 0; i < ma.size(); ++i) {
        if (a.component(i).is_zero()) continue;
        for (std::size_t j = 0; j < mb.size(); ++j) {
            if (b.component(j).is_zero()) continue;
            int s = detail::merge_sign(ma[i], mb[j]);
            if (s == 0) continue;
            auto r = static_cast<std::size_t>(tab.rank_of_mask[ma[i] | mb[j]]);
            auto prod = a.component(i) * b.component(j);
            if (s > 0)
                out.component(r) += prod;
            else
                out.component(r) -= prod;
        }
    }
    return out;
}

/// Exact exterior derivative. Throws for top-degree forms.
template <class Scalar>
PolyForm<Scalar> exterior_derivative(const PolyForm<Scalar>& phi)
{
    const int n = phi.ambient();
    const int r = phi.degree();
    if (r >= n) throw DegreeError("exterior derivative of a top-degree form");
    const auto& tab = detail::basis_table(n);
    const auto& masks = tab.masks[static_cast<std::size_t>(r)];
    PolyForm<Scalar> out(r + 1, n);
    for (std::size_t l = 0; l < masks.size(); ++l) {
        if (phi.component(l).is_zero()) continue;
        for (int j = 0; j < n; ++j) {
            int s = detail::merge_sign(1u << j, masks[l]);
            if (s == 0) continue;
            auto dp = phi.component(l).derivative(j);
            if (dp.is_zero()) continue;
            auto rk = static_cast<std::size_t>(tab.rank_of_mask[masks[l] | (1u << j)]);
            if (s > 0)
                out.component(rk) += dp;
            else
                out.component(rk) -= dp;
        }
    }
    return out;
}

/// Pointwise front-slot contraction phi -| v with a polynomial vector field.
template <class Scalar>
PolyForm<Scalar> contract(const PolyForm<Scalar>& phi, const PolyMap<Scalar>& v)
{
    const int n = phi.ambient();
    const int r = phi.degree();
    if (r < 1) throw DegreeError("contraction of a 0-form");
    if (static_cast<int>(v.size()) != n) throw DegreeError("vector field dimension mismatch");
    const auto& tab = detail::basis_table(n);
    const auto& masks = tab.masks[static_cast<std::size_t>(r)];
    PolyForm<Scalar> out(r - 1, n);
    for (std::size_t l = 0; l < masks.size(); ++l) {
        if (phi.component(l).is_zero()) continue;
        int k = 0;
        for (std::uint32_t rest = masks[l]; rest; rest &= rest - 1, ++k) {
            int i = std::countr_zero(rest);
            const auto& vi = v[static_cast<std::size_t>(i)];
            if (vi.is_zero()) continue;
            auto rk = static_cast<std::size_t>(tab.rank_of_mask[masks[l] & ~(1u << i)]);
            auto prod = vi * phi.component(l);
            if (k & 1)
                out.component(rk) -= prod;
            else
                out.component(rk) += prod;
        }
    }
    return out;
}

/// Lie derivative by Cartan's formula L_v phi = d(phi -| v) + (d phi) -| v.
/// The first term is absent for 0-forms and the second for top-degree forms.
template <class Scalar>
PolyForm<Scalar> lie_derivative(const PolyForm<Scalar>& phi, const PolyMap<Scalar>& v)
{
    const int n = phi.ambient();
    const int r = phi.degree();
    PolyForm<Scalar> out(r, n);
    if (r >= 1) out += exterior_derivative(contract(phi, v));
    if (r < n) out += contract(exterior_derivative(phi), v);
    return out;
}

/// Lie derivative from the component representation
///   L_v phi = v^j d_j(phi_lambda) dx^lambda + d_j(v^i) phi_lambda dx^j ^ (dx^lambda -| e_i),
/// assembled directly on basis masks without calling d or contract.
template <class Scalar>
PolyForm<Scalar> lie_derivative_components(const PolyForm<Scalar>& phi, const PolyMap<Scalar>& v)
{
    const int n = phi.ambient();
    const int r = phi.degree();
    if (static_cast<int>(v.size()) != n) throw DegreeError("vector field dimension mismatch");
    const auto& tab = detail::basis_table(n);
    const auto& masks = tab.masks[static_cast<std::size_t>(r)];
    PolyForm<Scalar> out(r, n);
    for (std::size_t l = 0; l < masks.size(); ++l) {
        const auto& pl = phi.component(l);
        if (pl.is_zero()) continue;
        // Transport term: directional derivative of the coefficient.
        for (int j = 0; j < n; ++j) out.component(l) += v[static_cast<std::size_t>(j)] * pl.derivative(j);
        // Deformation term.
        int k = 0;
        for (std::uint32_t rest = masks[l]; rest; rest &= rest - 1, ++k) {
            int i = std::countr_zero(rest);
            const std::uint32_t removed = masks[l] & ~(1u << i);
            const int contract_sign = (k & 1) ? -1 : 1;
            for (int j = 0; j < n; ++j) {
                int s = detail::merge_sign(1u << j, removed);
                if (s == 0) continue;
                auto dv = v[static_cast<std::size_t>(i)].derivative(j);
                if (dv.is_zero()) continue;
                auto rk = static_cast<std::size_t>(tab.rank_of_mask[removed | (1u << j)]);
                auto prod = dv * pl;
                if (s * contract_sign > 0)
                    out.component(rk) += prod;
                else
                    out.component(rk) -= prod;
            }
        }
    }
    return out;
}

/// Exact pullback f^# phi under a polynomial map f : R^n -> R^m.
template <class Scalar>
PolyForm<Scalar> pullback(const PolyForm<Scalar>& phi, const PolyMap<Scalar>& f)
{
    const int m = phi.ambient();
    if (static_cast<int>(f.size()) != m) throw DegreeError("pullback: map target dimension mismatch");
    if (f.empty()) return phi;
    const int n = f.front().num_vars();
    const int r = phi.degree();
    if (r > n) throw DegreeError("pullback: degree exceeds source dimension");
    // df_i as polynomial 1-forms on R^n.
    std::vector<PolyForm<Scalar>> df;
    for (const auto& fi : f) {
        std::vector<Polynomial<Scalar>> comps;
        for (int j = 0; j < n; ++j) comps.push_back(fi.derivative(j));
        df.emplace_back(1, n, std::move(comps));
    }
    const auto& masks = detail::basis_table(m).masks[static_cast<std::size_t>(r)];
    PolyForm<Scalar> out(r, n);
    for (std::size_t l = 0; l < masks.size(); ++l) {
        if (phi.component(l).is_zero()) continue;
        PolyForm<Scalar> basis_pull(0, n, {Polynomial<Scalar>::constant(n, Scalar(1))});
        for (std::uint32_t rest = masks[l]; rest; rest &= rest - 1)
            basis_pull = wedge(basis_pull, df[static_cast<std::size_t>(std::countr_zero(rest))]);
        out += phi.component(l).compose(f) * basis_pull;
    }
    return out;
}

template <class Scalar>
PolyMap<Scalar> identity_map(int n)
{
    PolyMap<Scalar> f;
    for (int i = 0; i < n; ++i) f.push_back(Polynomial<Scalar>::variable(n, i));
    return f;
}

/// x -> A x + b as a polynomial map.
inline PolyMap<double> affine_map(const Mat& a, const Vec& b)
{
    const int n = static_cast<int>(a.cols());
    PolyMap<double> f;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        auto p = Polynomial<double>::constant(n, b[i]);
        for (int j = 0; j < n; ++j) p += Polynomial<double>::variable(n, j) * a(i, j);
        f.push_back(p);
    }
    return f;
}

} // namespace currentkit

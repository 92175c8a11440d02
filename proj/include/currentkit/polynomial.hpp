#pragma once

#include "core.hpp"

#include <map>
#include <span>
#include <vector>

namespace currentkit {

using Exponent = std::vector<int>;

/// Sparse multivariate polynomial; zero coefficients are never stored.
template <class Scalar = double>
class Polynomial {
public:
    using scalar_type = Scalar;
    using TermMap = std::map<Exponent, Scalar>;

    Polynomial() = default;
    explicit Polynomial(int num_vars) : nvars_(num_vars) {}

    static Polynomial constant(int num_vars, Scalar c)
    {
        return monomial(num_vars, Exponent(static_cast<std::size_t>(num_vars), 0), c);
    }

    static Polynomial variable(int num_vars, int i)
    {
        Exponent e(static_cast<std::size_t>(num_vars), 0);
        e.at(static_cast<std::size_t>(i)) = 1;
        return monomial(num_vars, e, Scalar(1));
    }

    static Polynomial monomial(int num_vars, Exponent e, Scalar c)
    {
        if (static_cast<int>(e.size()) != num_vars) throw Error("monomial exponent length mismatch");
        for (int k : e)
            if (k < 0) throw Error("negative exponent");
        Polynomial p(num_vars);
        if (c != Scalar(0)) p.terms_.emplace(std::move(e), c);
        return p;
    }

    int num_vars() const { return nvars_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    int total_degree() const
    {
        int d = 0;
        for (const auto& [e, c] : terms_) {
            int s = 0;
            for (int k : e) s += k;
            d = std::max(d, s);
        }
        return d;
    }

    Polynomial& operator+=(const Polynomial& o)
    {
        check(o);
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    Polynomial& operator-=(const Polynomial& o)
    {
        check(o);
        for (const auto& [e, c] : o.terms_) add_term(e, -c);
        return *this;
    }
    Polynomial& operator*=(const Scalar& s)
    {
        if (s == Scalar(0)) {
            terms_.clear();
            return *this;
        }
        for (auto& [e, c] : terms_) c *= s;
        return *this;
    }

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator-(Polynomial a) { return a *= Scalar(-1); }
    friend Polynomial operator*(Polynomial a, const Scalar& s) { return a *= s; }
    friend Polynomial operator*(const Scalar& s, Polynomial a) { return a *= s; }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b)
    {
        a.check(b);
        Polynomial out(a.nvars_);
        for (const auto& [ea, ca] : a.terms_) {
            for (const auto& [eb, cb] : b.terms_) {
                Exponent e(ea);
                for (std::size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
                out.add_term(e, ca * cb);
            }
        }
        return out;
    }

    friend bool operator==(const Polynomial& a, const Polynomial& b) = default;

    Polynomial derivative(int var) const
    {
        if (var < 0 || var >= nvars_) throw Error("derivative variable out of range");
        Polynomial out(nvars_);
        for (const auto& [e, c] : terms_) {
            int k = e[static_cast<std::size_t>(var)];
            if (k == 0) continue;
            Exponent d(e);
            d[static_cast<std::size_t>(var)] = k - 1;
            out.add_term(d, c * Scalar(k));
        }
        return out;
    }

    template <class T>
    T evaluate(std::span<const T> x) const
    {
        if (static_cast<int>(x.size()) != nvars_) throw Error("polynomial evaluated at point of wrong dimension");
        T sum(0);
        for (const auto& [e, c] : terms_) {
            T m = T(c);
            for (std::size_t i = 0; i < e.size(); ++i)
                for (int k = 0; k < e[i]; ++k) m *= x[i];
            sum += m;
        }
        return sum;
    }

    double operator()(const Vec& x) const
    {
        return evaluate<double>(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
    }

    /// p(q_0(y), ..., q_{k-1}(y)); all q share a variable count.
    Polynomial compose(const std::vector<Polynomial>& subs) const
    {
        if (static_cast<int>(subs.size()) != nvars_) throw Error("compose: substitution count mismatch");
        if (subs.empty()) return *this;
        const int m = subs.front().num_vars();
        // Memoize powers of each substituted polynomial.
        std::vector<std::vector<Polynomial>> powers(subs.size());
        auto power = [&](std::size_t i, int k) -> const Polynomial& {
            auto& pw = powers[i];
            if (pw.empty()) pw.push_back(constant(m, Scalar(1)));
            while (static_cast<int>(pw.size()) <= k) pw.push_back(pw.back() * subs[i]);
            return pw[static_cast<std::size_t>(k)];
        };
        Polynomial out(m);
        for (const auto& [e, c] : terms_) {
            Polynomial term = constant(m, c);
            for (std::size_t i = 0; i < e.size(); ++i)
                if (e[i] > 0) term = term * power(i, e[i]);
            out += term;
        }
        return out;
    }

    /// Maps the coefficients through `f` (e.g. to change the scalar type).
    template <class Other, class F>
    Polynomial<Other> convert(F f) const
    {
        Polynomial<Other> out(nvars_);
        for (const auto& [e, c] : terms_) out += Polynomial<Other>::monomial(nvars_, e, f(c));
        return out;
    }

private:
    void check(const Polynomial& o) const
    {
        if (o.nvars_ != nvars_) throw Error("polynomial variable count mismatch");
    }

    void add_term(const Exponent& e, const Scalar& c)
    {
        auto it = terms_.find(e);
        if (it == terms_.end()) {
            if (c != Scalar(0)) terms_.emplace(e, c);
            return;
        }
        it->second += c;
        if (it->second == Scalar(0)) terms_.erase(it);
    }

    int nvars_ = 0;
    TermMap terms_;
};

} // namespace currentkit

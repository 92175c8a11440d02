#pragma once

// Kinematics of chains under motions: flows, the Reynolds operator,
// deformation chains, the homotopy formula and the transport derivative with
// its independent oracles.
//
// Chains are first split along the motion's kink hyperplanes, so that
// piecewise-affine motions are affine on every simplex; this leaves the current
// unchanged. Pushforwards by kappa_tau are evaluated through pullbacks at material
// points, using v_tau(kappa_tau(x)) = kappa_dot_tau(x), so no inversion of the
// motion is needed on these paths. The Eulerian velocity (which inverts
// kappa_tau) is used only by the oracles that need a genuine spatial field.

#include "flat_norm.hpp"
#include "motion.hpp"

namespace currentkit {

/// T triangulated so the motion is smooth on every simplex.
inline Chain adapted_chain(const Motion& m, const Chain& t)
{
    return m.kinks().empty() ? t : split_chain(t, m.kinks());
}

using TimeVectorField = std::function<Vec(double, const Vec&)>;

struct FlowOptions {
    double tolerance = 1e-11;
    double initial_step = 1e-2;
    double min_step = 1e-10;
    int max_steps = 1000000;
};

/// J_{s,t}(x): the solution at time s of y' = v(tau, y) with y(t) = x, by RK4
/// with step-doubling error control. Steps whose local error estimate exceeds
/// the tolerance are rejected and retried with a smaller step.
inline Vec flow(const TimeVectorField& v, double s, double t, const Vec& x, const FlowOptions& opts = {})
{
    if (s == t) return x;
    const double dir = s > t ? 1.0 : -1.0;
    auto rk4 = [&](double tau, const Vec& y, double h) {
        Vec k1 = v(tau, y);
        Vec k2 = v(tau + 0.5 * h, y + 0.5 * h * k1);
        Vec k3 = v(tau + 0.5 * h, y + 0.5 * h * k2);
        Vec k4 = v(tau + h, y + h * k3);
        return Vec(y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4));
    };
    double tau = t;
    Vec y = x;
    double h = dir * std::min(opts.initial_step, std::abs(s - t));
    for (int step = 0; step < opts.max_steps; ++step) {
        if (std::abs(s - tau) <= 1e-15 * std::max(1.0, std::abs(s))) return y;
        if (std::abs(h) > std::abs(s - tau)) h = s - tau;
        Vec full = rk4(tau, y, h);
        Vec half = rk4(tau + 0.5 * h, rk4(tau, y, 0.5 * h), 0.5 * h);
        double err = (half - full).norm() / 15.0;
        double scale = opts.tolerance * std::max(1.0, half.norm());
        if (err <= scale) {
            tau += h;
            y = half + (half - full) / 15.0;
        }
        double factor = err > 0.0 ? 0.9 * std::pow(scale / err, 0.2) : 2.0;
        h *= std::clamp(factor, 0.2, 2.0);
        if (std::abs(h) < opts.min_step) throw NumericalError("flow: step size underflow");
    }
    throw NumericalError("flow: step budget exhausted");
}

/// The Eulerian velocity of a motion as a time-dependent field.
inline TimeVectorField velocity_field(const Motion& m)
{
    return [m](double t, const Vec& y) { return m.velocity(t, m.inverse(t, y)); };
}

inline VectorField velocity_field(const Motion& m, double t)
{
    return m.eulerian_velocity(t);
}

/// R_v(T) = v ^ dT + d(v ^ T). The first term is absent for 0-currents and
/// the second for top-degree currents.
inline Current reynolds_operator(const VectorField& v, const Current& t)
{
    const int r = t.degree(), n = t.ambient();
    if (r == 0) return boundary(v_wedge(v, t));
    if (r == n) return v_wedge(v, boundary(t));
    return v_wedge(v, boundary(t)) + boundary(v_wedge(v, t));
}

struct TimeQuadrature {
    int panels = 1;
    int points = 5;
    bool adaptive = true;
    double tolerance = 1e-9;
    int max_depth = 12;
};

/// Composite Gauss-Legendre in time; adaptive panels are split while one panel
/// and its two halves disagree by more than the tolerance.
inline double integrate_time(const std::function<double(double)>& f, double a, double b, const TimeQuadrature& q = {})
{
    if (a == b) return 0.0;
    const auto& gl = gauss_legendre(q.points);
    auto panel = [&](double lo, double hi) {
        double s = 0.0;
        for (std::size_t k = 0; k < gl.nodes.size(); ++k) s += gl.weights[k] * f(lo + (hi - lo) * gl.nodes[k]);
        return s * (hi - lo);
    };
    std::function<double(double, double, double, int)> refine = [&](double lo, double hi, double whole, int depth) {
        double mid = 0.5 * (lo + hi);
        double left = panel(lo, mid), right = panel(mid, hi);
        if (depth >= q.max_depth || std::abs(left + right - whole) <= q.tolerance * std::max(1.0, std::abs(whole)))
            return left + right;
        return refine(lo, mid, left, depth + 1) + refine(mid, hi, right, depth + 1);
    };
    double sum = 0.0;
    const double h = (b - a) / q.panels;
    for (int p = 0; p < q.panels; ++p) {
        double lo = a + p * h, hi = a + (p + 1) * h;
        double w = panel(lo, hi);
        sum += q.adaptive ? refine(lo, hi, w, 0) : w;
    }
    return sum;
}

/// The material representative x -> kappa_tau^# (omega -| v_tau) (or of omega
/// itself when `with_velocity` is false), as a form on the reference space.
inline FormField material_form(const Motion& m, double tau, const FormField& omega, bool with_velocity)
{
    const int deg = omega.degree() - (with_velocity ? 1 : 0);
    if (deg < 0) throw DegreeError("contraction of a 0-form");
    return FormField::sampled(deg, omega.ambient(), [m, tau, omega, with_velocity](const Vec& x) {
        Vec y = m.position(tau, x);
        CoVector w = omega(y);
        if (with_velocity) w = interior_product(w, m.velocity(tau, x));
        return pullback_covector(w, m.jacobian(tau, x));
    });
}

/// kappa_tau # T as a functional: T(kappa_tau^# phi).
inline Current pushforward_at(const Motion& m, double tau, const Current& t)
{
    return Current::functional(t.degree(), t.ambient(), {"push_" + m.name(), [m, tau, t](const FormField& phi, const EvalOptions& eo) {
                                                            return evaluate(t, material_form(m, tau, phi, false), eo);
                                                        }});
}

/// kappa_#([a, b] x T)(omega) = int_a^b (v_tau ^ kappa_tau # T)(omega) dtau.
inline Current deformation_chain(const Motion& m, double a, double b, const Current& t, const TimeQuadrature& q = {})
{
    if (t.degree() + 1 > t.ambient()) throw DegreeError("deformation chain would exceed the ambient dimension");
    m.check_time(a);
    m.check_time(b);
    return Current::functional(t.degree() + 1, t.ambient(),
                               {"deform_" + m.name(), [m, a, b, t, q](const FormField& omega, const EvalOptions& eo) {
                                    return integrate_time(
                                        [&](double tau) { return evaluate(t, material_form(m, tau, omega, true), eo); }, a, b, q);
                                }});
}

inline Current deformation_chain(const Motion& m, double a, double b, const Chain& chain, const TimeQuadrature& q = {})
{
    const Chain t = adapted_chain(m, chain);
    return deformation_chain(m, a, b, Current::leaf(t), q);
}

struct HomotopyTerms {
    double endpoint_difference = 0.0; // (kappa_b # T - kappa_a # T)(phi)
    double deformation_term = 0.0;    // d kappa_#([a,b] x T)(phi)
    double boundary_term = 0.0;       // kappa_#([a,b] x dT)(phi)
    double residual = 0.0;
};

/// Residual of the homotopy formula
///   kappa_b # T - kappa_a # T = d kappa_#([a,b] x T) + kappa_#([a,b] x dT).
inline HomotopyTerms homotopy_residual(const Motion& m, double a, double b, const Chain& chain, const FormField& phi,
                                       const EvalOptions& eo = {}, const TimeQuadrature& q = {})
{
    const Chain t = adapted_chain(m, chain);
    const int r = t.degree(), n = t.ambient();
    Current leaf = Current::leaf(t);
    HomotopyTerms h;
    h.endpoint_difference = evaluate(pushforward_at(m, b, leaf), phi, eo) - evaluate(pushforward_at(m, a, leaf), phi, eo);
    if (r < n) h.deformation_term = evaluate(boundary(deformation_chain(m, a, b, leaf, q)), phi, eo);
    if (r > 0) h.boundary_term = evaluate(deformation_chain(m, a, b, Current::leaf(boundary(t)), q), phi, eo);
    h.residual = std::abs(h.endpoint_difference - h.deformation_term - h.boundary_term);
    return h;
}

/// A time-dependent cochain X_psi(t), represented by its form D_psi(t) and the
/// rate form d/dt D_psi(t).
class Cochain {
public:
    using FormAt = std::function<FormField(double)>;

    Cochain() = default;
    Cochain(int degree, int ambient, FormAt value, FormAt rate)
        : degree_(degree), ambient_(ambient), value_(std::move(value)), rate_(std::move(rate))
    {}

    /// sum_k t^k psi_k with polynomial forms psi_k.
    static Cochain polynomial_in_time(std::vector<PolyForm<double>> terms)
    {
        if (terms.empty()) throw Error("cochain needs at least one term");
        const int r = terms.front().degree(), n = terms.front().ambient();
        auto shared = std::make_shared<const std::vector<PolyForm<double>>>(std::move(terms));
        auto value = [shared, r, n](double t) {
            PolyForm<double> acc(r, n);
            double p = 1.0;
            for (const auto& f : *shared) {
                acc += f * p;
                p *= t;
            }
            return FormField::polynomial(acc);
        };
        auto rate = [shared, r, n](double t) {
            PolyForm<double> acc(r, n);
            double p = 1.0;
            for (std::size_t k = 1; k < shared->size(); ++k) {
                acc += (*shared)[k] * (static_cast<double>(k) * p);
                p *= t;
            }
            return FormField::polynomial(acc);
        };
        return Cochain(r, n, value, rate);
    }

    static Cochain constant(const FormField& f)
    {
        FormField zero = 0.0 * f;
        return Cochain(f.degree(), f.ambient(), [f](double) { return f; }, [zero](double) { return zero; });
    }

    int degree() const { return degree_; }
    int ambient() const { return ambient_; }
    FormField at(double t) const { return value_(t); }
    FormField rate(double t) const { return rate_(t); }

private:
    int degree_ = 0;
    int ambient_ = 0;
    FormAt value_, rate_;
};

struct TransportTerms {
    double rate_term = 0.0;        // X_psi_dot(kappa_tau # T)
    double deformation_term = 0.0; // X_psi(d(v ^ kappa_tau # T))
    double boundary_term = 0.0;    // X_psi(v ^ kappa_tau # dT)
    double total = 0.0;
};

/// d/dt X_psi(t)(kappa_t # T) at tau by the transport formula
///   X_psi_dot(kappa # T) + X_psi(d(v ^ kappa # T)) + X_psi(v ^ kappa # dT).
inline TransportTerms transport_derivative(const Motion& m, const Chain& chain, const Cochain& psi, double tau,
                                           const EvalOptions& eo = {})
{
    const Chain t = adapted_chain(m, chain);
    if (psi.degree() != t.degree() || psi.ambient() != t.ambient()) throw DegreeError("cochain and chain degrees differ");
    const int r = t.degree(), n = t.ambient();
    Current leaf = Current::leaf(t);
    TransportTerms out;
    FormField form = psi.at(tau);
    out.rate_term = evaluate(leaf, material_form(m, tau, psi.rate(tau), false), eo);
    if (r < n) out.deformation_term = evaluate(leaf, material_form(m, tau, exterior_derivative(form), true), eo);
    if (r > 0) out.boundary_term = evaluate(Current::leaf(boundary(t)), material_form(m, tau, form, true), eo);
    out.total = out.rate_term + out.deformation_term + out.boundary_term;
    return out;
}

enum class DifferenceScheme { Central, Forward };

/// Eulerian oracle: difference quotient of X_psi(t) on the image chains
/// kappa_t # T built by vertex mapping (exact for motions affine on each simplex).
inline double transport_fd_eulerian(const Motion& m, const Chain& chain, const Cochain& psi, double tau, double eps,
                                    DifferenceScheme scheme = DifferenceScheme::Central, int push_levels = 0,
                                    const EvalOptions& eo = {})
{
    const Chain t = adapted_chain(m, chain);
    auto value = [&](double s) {
        Chain image = pushforward_chain(m.map_at(s), t, push_levels).chain;
        return evaluate(Current::leaf(image), psi.at(s), eo);
    };
    if (scheme == DifferenceScheme::Central) return (value(tau + eps) - value(tau - eps)) / (2 * eps);
    return (value(tau + eps) - value(tau)) / eps;
}

/// Lagrangian oracle: difference quotient of t -> T(kappa_t^# D_psi(t)).
inline double transport_fd_lagrangian(const Motion& m, const Chain& chain, const Cochain& psi, double tau, double eps,
                                      DifferenceScheme scheme = DifferenceScheme::Central, const EvalOptions& eo = {})
{
    const Chain t = adapted_chain(m, chain);
    Current leaf = Current::leaf(t);
    auto value = [&](double s) { return evaluate(leaf, material_form(m, s, psi.at(s), false), eo); };
    if (scheme == DifferenceScheme::Central) return (value(tau + eps) - value(tau - eps)) / (2 * eps);
    return (value(tau + eps) - value(tau)) / eps;
}

/// Spatial form of the derivative: (kappa_tau # T)(D_psi_dot + L_v D_psi) with the
/// Eulerian velocity and a finite-difference Lie derivative.
inline double transport_betounes(const Motion& m, const Chain& chain, const Cochain& psi, double tau, const EvalOptions& eo = {})
{
    const Chain t = adapted_chain(m, chain);
    VectorField v = m.eulerian_velocity(tau);
    FormField form = psi.at(tau);
    FormField sampled = FormField::sampled(
        form.degree(), form.ambient(), [form](const Vec& x) { return form(x); }, std::nullopt, 1e-5);
    FormField integrand = psi.rate(tau) + lie_derivative(sampled, v);
    return evaluate(pushforward_at(m, tau, Current::leaf(t)), integrand, eo);
}

struct ConvergenceRow {
    double eps = 0.0;
    double analytic = 0.0;
    double oracle = 0.0;
    double abs_error = 0.0;
    double order = std::numeric_limits<double>::quiet_NaN();
};

/// Observed orders between successive rows (filled into rows[1..]).
inline void fill_orders(std::vector<ConvergenceRow>& rows)
{
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& a = rows[i - 1];
        const auto& b = rows[i];
        if (a.abs_error > 0.0 && b.abs_error > 0.0)
            rows[i].order = std::log(a.abs_error / b.abs_error) / std::log(a.eps / b.eps);
    }
}

inline std::vector<ConvergenceRow> transport_fd_ladder(const Motion& m, const Chain& chain, const Cochain& psi, double tau,
                                                       const std::vector<double>& eps, DifferenceScheme scheme,
                                                       int push_levels = 0, const EvalOptions& eo = {})
{
    const Chain t = adapted_chain(m, chain);
    double analytic = transport_derivative(m, t, psi, tau, eo).total;
    std::vector<ConvergenceRow> rows;
    for (double e : eps) {
        ConvergenceRow row;
        row.eps = e;
        row.analytic = analytic;
        row.oracle = transport_fd_eulerian(m, t, psi, tau, e, scheme, push_levels, eo);
        row.abs_error = std::abs(row.oracle - analytic);
        rows.push_back(row);
    }
    fill_orders(rows);
    return rows;
}

struct ClassicalReynolds {
    double lhs = 0.0;
    double volume_term = 0.0;
    double flux_term = 0.0;
    double rhs() const { return volume_term + flux_term; }
};

using Density = std::function<double(double, const Vec&)>;

/// d/dt int_{kappa_t T} rho(t) dV at tau, against the classical form
/// int d rho/dt dV + int_{boundary} rho v.nu dA with outward face normals.
inline ClassicalReynolds classical_reynolds(const Motion& m, const Chain& chain, const Density& rho, const Density& rho_dot,
                                            double tau, int push_levels = 0, const EvalOptions& eo = {})
{
    const Chain t = adapted_chain(m, chain);
    const int n = t.ambient();
    if (t.degree() != n) throw DegreeError("classical Reynolds theorem needs a full-dimensional chain");
    const MultiIndex vol_index = MultiIndex::all(n, n).front();
    auto density_form = [n, vol_index](Density f, double s) {
        return FormField::sampled(n, n, [f, s, vol_index](const Vec& x) { return CoVector::unit(vol_index, f(s, x)); });
    };
    Cochain psi(n, n, [=](double s) { return density_form(rho, s); }, [=](double s) { return density_form(rho_dot, s); });
    ClassicalReynolds out;
    out.lhs = transport_derivative(m, t, psi, tau, eo).total;
    out.volume_term = evaluate(pushforward_at(m, tau, Current::leaf(t)), density_form(rho_dot, tau), eo);

    // Flux through the faces of every image simplex; interior faces cancel.
    Chain image = subdivide(pushforward_chain(m.map_at(tau), t, push_levels).chain, eo.levels);
    VectorField v = m.eulerian_velocity(tau);
    const auto& rule = simplex_rule(n - 1);
    for (const auto& [idx, mult] : image.term_map()) {
        auto pts = image.points(idx);
        Mat e(n, n);
        for (int k = 0; k < n; ++k) e.col(k) = pts[static_cast<std::size_t>(k) + 1] - pts[0];
        const double orient = e.determinant() > 0 ? 1.0 : -1.0;
        for (std::size_t k = 0; k < pts.size(); ++k) {
            std::vector<Vec> face;
            for (std::size_t j = 0; j < pts.size(); ++j)
                if (j != k) face.push_back(pts[j]);
            Mat fe(n, n - 1);
            for (int j = 0; j < n - 1; ++j) fe.col(j) = face[static_cast<std::size_t>(j) + 1] - face[0];
            Vec w = face[0] - pts[k];
            Vec nu = w - fe * fe.colPivHouseholderQr().solve(w);
            nu.normalize();
            const double area = simplex_volume(face);
            double integral = 0.0;
            for (std::size_t q = 0; q < rule.weights.size(); ++q) {
                Vec y = Vec::Zero(n);
                for (std::size_t i = 0; i < face.size(); ++i) y += rule.bary[q][i] * face[i];
                integral += rule.weights[q] * rho(tau, y) * v(y).dot(nu);
            }
            out.flux_term += mult * orient * area * integral;
        }
    }
    return out;
}

/// Dual estimate of the mass distance between kappa_{t+eps} # T and kappa_t # T:
/// sup over the family of |difference(phi)| / M_K(phi).
inline std::vector<double> continuity_modulus(const Motion& m, const Chain& chain, double time, const std::vector<double>& eps,
                                              const std::vector<FormField>& family, const Box& k,
                                              const SeminormOptions& so = {}, const EvalOptions& eo = {})
{
    const Chain t = adapted_chain(m, chain);
    if (family.empty()) throw Error("continuity modulus needs a test family");
    Current leaf = Current::leaf(t);
    std::vector<double> norms, base;
    for (const auto& f : family) {
        norms.push_back(seminorm_comass(f, k, so).value);
        base.push_back(evaluate(pushforward_at(m, time, leaf), f, eo));
    }
    std::vector<double> out;
    for (double e : eps) {
        double sup = 0.0;
        for (std::size_t i = 0; i < family.size(); ++i) {
            if (!(norms[i] > 0.0)) continue;
            double d = evaluate(pushforward_at(m, time + e, leaf), family[i], eo) - base[i];
            sup = std::max(sup, std::abs(d) / norms[i]);
        }
        out.push_back(sup);
    }
    return out;
}

struct BalanceReport {
    double transport = 0.0;        // transport_derivative
    double balance = 0.0;          // balance-law form
    double difference = 0.0;
    double balance_residual = 0.0; // max |psi_dot + d xi - phi| on the grid
};

/// Transport derivative re-expressed through a balance law
/// D_psi_dot + d D_xi = D_phi:
///   X_phi(kappa # T) + (X_psi -| v - X_xi)(kappa # dT) + X_psi(d(v ^ kappa # T)).
inline BalanceReport balance_transport(const Motion& m, const Chain& chain, const Cochain& psi, const Cochain& xi,
                                       const Cochain& phi, double tau, const Box& k, int resolution = 17,
                                       const EvalOptions& eo = {})
{
    const Chain t = adapted_chain(m, chain);
    const int r = t.degree(), n = t.ambient();
    if (r < 1) throw DegreeError("balance law needs a chain of degree >= 1");
    if (xi.degree() != r - 1 || phi.degree() != r || psi.degree() != r) throw DegreeError("balance law degrees inconsistent");
    BalanceReport rep;
    FormField lhs = psi.rate(tau) + exterior_derivative(xi.at(tau)) - phi.at(tau);
    for (const auto& x : grid_points(k, resolution)) rep.balance_residual = std::max(rep.balance_residual, euclidean_norm(lhs(x)));
    if (rep.balance_residual > 1e-8) throw DomainError("balance law residual exceeds 1e-8 on the grid");

    TransportTerms tt = transport_derivative(m, t, psi, tau, eo);
    rep.transport = tt.total;
    Current leaf = Current::leaf(t);
    Current bleaf = Current::leaf(boundary(t));
    double source = evaluate(leaf, material_form(m, tau, phi.at(tau), false), eo);
    double flux = evaluate(bleaf, material_form(m, tau, psi.at(tau), true), eo) -
                  evaluate(bleaf, material_form(m, tau, xi.at(tau), false), eo);
    double deform = 0.0;
    if (r < n) deform = evaluate(leaf, material_form(m, tau, exterior_derivative(psi.at(tau)), true), eo);
    rep.balance = source + flux + deform;
    rep.difference = std::abs(rep.balance - rep.transport);
    return rep;
}

/// max over the points of |(kappa_{tau+eps}^# phi - kappa_{tau-eps}^# phi)/(2 eps) - kappa_tau^#(L_v phi)|.
inline double pullback_derivative_residual(const Motion& m, const FormField& phi, double tau, double eps,
                                           const std::vector<Vec>& points)
{
    VectorField v = m.eulerian_velocity(tau);
    FormField sampled = FormField::sampled(
        phi.degree(), phi.ambient(), [phi](const Vec& x) { return phi(x); }, std::nullopt, 1e-5);
    FormField lie = lie_derivative(sampled, v);
    FormField plus = material_form(m, tau + eps, phi, false);
    FormField minus = material_form(m, tau - eps, phi, false);
    FormField exact = material_form(m, tau, lie, false);
    double worst = 0.0;
    for (const auto& x : points) {
        CoVector fd = (plus(x) - minus(x)) * (0.5 / eps);
        worst = std::max(worst, euclidean_norm(fd - exact(x)));
    }
    return worst;
}

/// max over the points of |K^#(omega) -| e_t - kappa_tau^#(omega -| v_tau)| at
/// (tau, x), where K(t, x) = kappa_t(x) is the space-time map.
inline double et_contraction_residual(const Motion& m, const FormField& omega, double tau, const std::vector<Vec>& points)
{
    const int n = omega.ambient();
    double worst = 0.0;
    FormField material = material_form(m, tau, omega, true);
    for (const auto& x : points) {
        Mat jfull(n, n + 1);
        jfull.col(0) = m.velocity(tau, x);
        jfull.rightCols(n) = m.jacobian(tau, x);
        CoVector pulled = pullback_covector(omega(m.position(tau, x)), jfull);
        Vec et = Vec::Zero(n + 1);
        et[0] = 1.0;
        CoVector contracted = interior_product(pulled, et);
        CoVector expected = material(x);
        // Compare on the spatial components; dt components of the contraction vanish.
        const auto& masks = detail::basis_table(n + 1).masks[static_cast<std::size_t>(contracted.degree())];
        double err = 0.0;
        for (std::size_t l = 0; l < masks.size(); ++l) {
            double want = (masks[l] & 1u) ? 0.0
                                          : expected[static_cast<std::size_t>(detail::basis_table(n).rank_of_mask[masks[l] >> 1])];
            err = std::max(err, std::abs(contracted[l] - want));
        }
        worst = std::max(worst, err);
    }
    return worst;
}

/// Weak sharp-topology check of the derivative of kappa_t # T at tau:
/// sup over the family of |difference quotient(phi) - R_v(kappa_tau # T)(phi)| / S_K(phi).
inline double sharp_derivative_defect(const Motion& m, const Chain& chain, double tau, double eps,
                                      const std::vector<FormField>& family, const Box& k, const SeminormOptions& so = {},
                                      const EvalOptions& eo = {})
{
    const Chain t = adapted_chain(m, chain);
    double worst = 0.0;
    for (const auto& f : family) {
        double s = seminorm_sharp(f, k, so).value;
        if (!(s > 0.0)) continue;
        Cochain c = Cochain::constant(f);
        double q = transport_fd_lagrangian(m, t, c, tau, eps, DifferenceScheme::Central, eo);
        double exact = transport_derivative(m, t, c, tau, eo).total;
        worst = std::max(worst, std::abs(q - exact) / s);
    }
    return worst;
}

} // namespace currentkit

#pragma once

// Check suites, convergence studies and CSV reports behind the command-line
// driver. Every command returns rows; writing and exit codes live in the CLI.

#include "io.hpp"

#include <atomic>
#include <chrono>
#include <random>
#include <thread>

namespace currentkit {

/// Seeded generators for random polynomial data.
namespace sampling {

/// Random polynomial of total degree <= deg. Integer coefficients keep
/// algebraic identities exact in floating point.
inline Polynomial<double> random_polynomial(int n, int deg, std::mt19937_64& rng, bool integer = false)
{
    std::uniform_real_distribution<double> real(-1.0, 1.0);
    std::uniform_int_distribution<int> whole(-3, 3);
    std::uniform_int_distribution<int> keep(0, 2);
    Polynomial<double> p(n);
    Exponent e(static_cast<std::size_t>(n), 0);
    std::function<void(int, int)> rec = [&](int var, int left) {
        if (var == n) {
            if (keep(rng) != 0) p += Polynomial<double>::monomial(n, e, integer ? whole(rng) : real(rng));
            return;
        }
        for (int k = 0; k <= left; ++k) {
            e[static_cast<std::size_t>(var)] = k;
            rec(var + 1, left - k);
        }
        e[static_cast<std::size_t>(var)] = 0;
    };
    rec(0, deg);
    return p;
}

inline PolyForm<double> random_polyform(int r, int n, int deg, std::mt19937_64& rng, bool integer = false)
{
    PolyForm<double> f(r, n);
    for (std::size_t i = 0; i < f.size(); ++i) f.component(i) = random_polynomial(n, deg, rng, integer);
    return f;
}

inline PolyMap<double> random_polymap(int n, int deg, std::mt19937_64& rng, bool integer = false)
{
    PolyMap<double> v;
    for (int i = 0; i < n; ++i) v.push_back(random_polynomial(n, deg, rng, integer));
    return v;
}

/// Affine map x -> A x + b with A = I + 0.5 U, U uniform in [-1, 1].
inline LipMap random_affine(int n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat a = Mat::Identity(n, n);
    Vec b(n);
    for (int i = 0; i < n; ++i) {
        b[i] = u(rng);
        for (int j = 0; j < n; ++j) a(i, j) += 0.5 * u(rng);
    }
    if (std::abs(a.determinant()) < 0.1) a += Mat::Identity(n, n);
    return affine_lipmap(a, b);
}

/// A smooth non-polynomial r-form sum_l sin(a_l . x + b_l) dx^l together with
/// its exact exterior derivative.
struct TrigForm {
    FormField form;
    FormField derivative;
};

inline TrigForm random_trig_form(int r, int n, std::mt19937_64& rng, double frequency = 2.0)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::size_t m = binomial(n, r);
    std::vector<Vec> a(m, Vec(n));
    std::vector<double> b(m);
    for (std::size_t l = 0; l < m; ++l) {
        for (int i = 0; i < n; ++i) a[l][i] = frequency * u(rng);
        b[l] = u(rng);
    }
    auto form = FormField::sampled(r, n, [r, n, a, b, m](const Vec& x) {
        CoVector c(r, n);
        for (std::size_t l = 0; l < m; ++l) c[l] = std::sin(a[l].dot(x) + b[l]);
        return c;
    });
    if (r == n) return {form, FormField()};
    auto deriv = FormField::sampled(r + 1, n, [r, n, a, b, m](const Vec& x) {
        CoVector c(r + 1, n);
        const auto idx = MultiIndex::all(r, n);
        for (std::size_t l = 0; l < m; ++l) {
            const double g = std::cos(a[l].dot(x) + b[l]);
            for (int j = 0; j < n; ++j) c += wedge(CoVector::unit(MultiIndex({j}, n), a[l][j] * g), CoVector::unit(idx[l], 1.0));
        }
        return c;
    });
    return {form, deriv};
}

} // namespace sampling

/// How a row passes: |value - oracle| <= tol, value <= oracle + tol,
/// value >= tol, or never fails (Info).
enum class Rule { Match, Bound, AtLeast, Info };

struct ReportRow {
    std::string scenario;
    std::string quantity;
    double value = 0.0;
    double oracle = std::numeric_limits<double>::quiet_NaN();
    double abs_error = 0.0;
    double rel_error = 0.0;
    int level = -1;
    double tolerance = 0.0;
    Rule rule = Rule::Info;
    bool pass = true;
    double runtime = 0.0;
};

struct RunOptions {
    double tolerance_scale = 1.0;
    std::optional<std::uint64_t> seed;
    int workers = 1;
    int log_level = 0;
};

class Report {
public:
    Report(std::string scenario, const RunOptions& opts) : scenario_(std::move(scenario)), opts_(opts) {}

    /// |value - oracle| <= tol * scale.
    ReportRow& match(const std::string& q, double value, double oracle, double tol, int level = -1)
    {
        ReportRow r = base(q, value, level);
        r.oracle = oracle;
        r.abs_error = std::abs(value - oracle);
        r.rel_error = oracle != 0.0 ? r.abs_error / std::abs(oracle) : r.abs_error;
        r.rule = Rule::Match;
        r.tolerance = tol * opts_.tolerance_scale;
        r.pass = r.abs_error <= r.tolerance;
        return push(r);
    }

    /// value <= bound + tol * scale.
    ReportRow& bound(const std::string& q, double value, double upper, double tol, int level = -1)
    {
        ReportRow r = base(q, value, level);
        r.oracle = upper;
        r.abs_error = std::max(0.0, value - upper);
        r.rel_error = upper != 0.0 ? r.abs_error / std::abs(upper) : r.abs_error;
        r.rule = Rule::Bound;
        r.tolerance = tol * opts_.tolerance_scale;
        r.pass = r.abs_error <= r.tolerance;
        return push(r);
    }

    /// value >= threshold (orders and rates; not scaled).
    ReportRow& at_least(const std::string& q, double value, double threshold, int level = -1)
    {
        ReportRow r = base(q, value, level);
        r.oracle = threshold;
        r.abs_error = std::isnan(value) ? 0.0 : std::max(0.0, threshold - value);
        r.rule = Rule::AtLeast;
        r.tolerance = threshold;
        r.pass = !std::isnan(value) && value >= threshold;
        return push(r);
    }

    ReportRow& info(const std::string& q, double value, double oracle = std::numeric_limits<double>::quiet_NaN(), int level = -1)
    {
        ReportRow r = base(q, value, level);
        r.oracle = oracle;
        if (!std::isnan(oracle)) {
            r.abs_error = std::abs(value - oracle);
            r.rel_error = oracle != 0.0 ? r.abs_error / std::abs(oracle) : r.abs_error;
        }
        return push(r);
    }

    /// Times a block and attributes the runtime to the rows it adds.
    template <class F>
    void timed(F&& f)
    {
        auto start = std::chrono::steady_clock::now();
        std::size_t first = rows_.size();
        f();
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (std::size_t i = first; i < rows_.size(); ++i) rows_[i].runtime = secs;
    }

    void fail(const std::string& q, const std::string& message)
    {
        ReportRow r = base(q + ": " + message, std::numeric_limits<double>::quiet_NaN(), -1);
        r.rule = Rule::Match;
        r.pass = false;
        push(r);
    }

    const std::vector<ReportRow>& rows() const { return rows_; }
    std::vector<ReportRow>& rows() { return rows_; }
    const RunOptions& options() const { return opts_; }

private:
    ReportRow base(const std::string& q, double value, int level) const
    {
        ReportRow r;
        r.scenario = scenario_;
        r.quantity = q;
        r.value = value;
        r.level = level;
        return r;
    }
    ReportRow& push(const ReportRow& r)
    {
        rows_.push_back(r);
        return rows_.back();
    }

    std::string scenario_;
    RunOptions opts_;
    std::vector<ReportRow> rows_;
};

namespace detail {

inline const char* rule_name(Rule r)
{
    switch (r) {
    case Rule::Match: return "match";
    case Rule::Bound: return "bound";
    case Rule::AtLeast: return "at_least";
    case Rule::Info: return "info";
    }
    return "info";
}

inline void log(const RunOptions& o, int level, const std::string& msg)
{
    if (o.log_level >= level) std::fprintf(stderr, "[currentkit] %s\n", msg.c_str());
}

inline std::uint64_t seed_of(const ScenarioConfig& s, const RunOptions& o) { return o.seed.value_or(s.seed); }

inline Cochain cochain_of(const ScenarioConfig& s)
{
    return Cochain::polynomial_in_time(s.cochain);
}

/// The spatial box every estimate for the scenario lives in.
inline Box scenario_box(const ScenarioConfig& s)
{
    Box b = s.chain.bounding_box();
    if (s.complex) b = Box(b.lower.cwiseMin(s.complex->box.lower), b.upper.cwiseMax(s.complex->box.upper));
    if (s.motion) b = Box(b.lower.cwiseMin(s.motion->support().lower), b.upper.cwiseMax(s.motion->support().upper));
    return b;
}

/// Least-squares slope of log(y) against log(x) over points with y > floor.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double floor = 0.0)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(y[i] > floor) || !(x[i] > 0)) continue;
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++k;
    }
    if (k < 2) return std::numeric_limits<double>::quiet_NaN();
    double den = k * sxx - sx * sx;
    return den == 0.0 ? std::numeric_limits<double>::quiet_NaN() : (k * sxy - sx * sy) / den;
}

/// Epsilons usable around tau inside the motion's interval.
inline std::vector<double> usable_epsilons(const ScenarioConfig& s, bool central, const std::vector<double>& eps)
{
    std::vector<double> out;
    for (double e : eps) {
        bool ok = s.tau + e <= s.motion->t1() && (!central || s.tau - e >= s.motion->t0());
        if (ok) out.push_back(e);
    }
    return out;
}

/// Scenario incompatibilities that must surface before any computation.
inline void validate(const ScenarioConfig& s)
{
    if (s.complex) {
        SimplicialComplex x = SimplicialComplex::freudenthal(s.complex->box, s.complex->resolution);
        try {
            (void)x.coefficients(s.chain);
        } catch (const Error& e) {
            throw ParseError(s.source + ".complex", std::string("chain is not supported on the complex: ") + e.what());
        }
    }
    if (!s.cochain.empty() && !s.motion) throw ParseError(s.source + ".cochain", "a cochain needs a motion");
}

} // namespace detail

// ---------------------------------------------------------------- verify

inline void verify_exterior(const ScenarioConfig& s, Report& rep, std::mt19937_64& rng)
{
    const int n = s.chain.ambient();
    double dd = 0.0, cartan = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const int r = static_cast<int>(rng() % static_cast<std::uint64_t>(n + 1));
        auto phi = sampling::random_polyform(r, n, 3, rng, true);
        auto v = sampling::random_polymap(n, 2, rng, true);
        if (r + 2 <= n) {
            auto ddphi = exterior_derivative(exterior_derivative(phi));
            for (std::size_t i = 0; i < ddphi.size(); ++i)
                for (const auto& [e, c] : ddphi.component(i).terms()) dd = std::max(dd, std::abs(c));
        }
        auto res = lie_derivative_components(phi, v) - lie_derivative(phi, v);
        for (std::size_t i = 0; i < res.size(); ++i)
            for (const auto& [e, c] : res.component(i).terms()) cartan = std::max(cartan, std::abs(c));
    }
    rep.match("d_of_d_is_zero", dd, 0.0, 0.0);
    rep.match("cartan_identity", cartan, 0.0, 0.0);
}

inline void verify_chain_identities(const ScenarioConfig& s, Report& rep, std::mt19937_64& rng)
{
    const int n = s.chain.ambient(), r = s.chain.degree();
    const Current t = Current::leaf(s.chain);
    const EvalOptions eo{};
    if (r >= 1) {
        double worst = 0.0, scale = 0.0;
        for (int trial = 0; trial < 5; ++trial) {
            auto phi = sampling::random_polyform(r - 1, n, 3, rng);
            double lhs = evaluate(boundary(t), FormField::polynomial(phi), eo);
            double rhs = evaluate(t, FormField::polynomial(exterior_derivative(phi)), eo);
            worst = std::max(worst, std::abs(lhs - rhs));
            scale = std::max(scale, std::abs(rhs));
        }
        rep.match("boundary_adjointness", worst, 0.0, s.tolerance("adjointness", 1e-8));
        rep.info("boundary_adjointness_scale", scale);
    }
    {
        double worst = 0.0;
        for (int trial = 0; trial < 5; ++trial) {
            auto phi = sampling::random_polyform(r, n, 2, rng);
            auto v = sampling::random_polymap(n, 2, rng);
            VectorField vf = VectorField::polynomial(v);
            double lhs = evaluate(reynolds_operator(vf, t), FormField::polynomial(phi), eo);
            double rhs = evaluate(t, FormField::polynomial(lie_derivative(phi, v)), eo);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
        rep.match("reynolds_duality", worst, 0.0, s.tolerance("reynolds_duality", 1e-8));
    }
    {
        LipMap f = sampling::random_affine(n, rng);
        Chain pushed = pushforward_chain(f, s.chain).chain;
        Box k = s.chain.bounding_box(0.1);
        double lip = lipschitz_constant(f, k).value;
        rep.bound("pushforward_mass_bound", mass(pushed), std::pow(lip, r) * mass(s.chain), 1e-6);
        if (r >= 1) {
            Chain diff = boundary(pushed) - pushforward_chain(f, boundary(s.chain)).chain;
            rep.match("pushforward_commutes_with_boundary", mass_chain(diff, false).value, 0.0, 0.0);
        }
    }
}

inline void verify_flat_ladder(const ScenarioConfig& s, Report& rep)
{
    if (!s.complex) return;
    const int r = s.chain.degree(), n = s.chain.ambient();
    SimplicialComplex x = SimplicialComplex::freudenthal(s.complex->box, s.complex->resolution);
    const Box& k = s.complex->box;
    auto family = polynomial_test_family(r, n, k, 3);
    SeminormOptions so;
    so.seed = s.seed;
    Current t = Current::leaf(s.chain);
    double sharp = sharp_lower_bound(t, family, k, so).value;
    double flat_dual = dual_flat_lower_bound(t, family, k, so).value;
    FlatNormResult lp = flat_norm_lp(s.chain, x);
    double m = mass(s.chain);
    const double slack = s.tolerance("ladder_slack", 1e-6);
    rep.bound("sharp_lower_bound_le_dual_flat", sharp, flat_dual, slack);
    rep.bound("dual_flat_le_flat_norm_lp", flat_dual, lp.value, slack);
    rep.bound("flat_norm_lp_le_mass", lp.value, m, slack);
    rep.match("flat_norm_decomposition", lp.mass_r + lp.mass_s, lp.value, 1e-8);
    if (r >= 1) {
        FlatNormResult lb = flat_norm_lp(boundary(s.chain), x);
        rep.bound("flat_norm_of_boundary_le_flat_norm", lb.value, lp.value, slack);
    }
}

inline void verify_motion(const ScenarioConfig& s, Report& rep)
{
    const Motion& m = *s.motion;
    const int r = s.chain.degree(), n = s.chain.ambient();
    const EvalOptions eo{};
    std::vector<Vec> samples = grid_points(s.chain.bounding_box(), 5);
    std::mt19937_64 rng(s.seed + 1);

    // Flow of the Eulerian velocity reproduces the motion.
    if (m.is_smooth()) {
        double h = std::min(0.1, 0.5 * (m.t1() - s.tau));
        if (h > 0) {
            TimeVectorField v = velocity_field(m);
            double worst = 0.0;
            for (std::size_t i = 0; i < samples.size(); i += 5) {
                Vec y = m.position(s.tau, samples[i]);
                worst = std::max(worst, (flow(v, s.tau + h, s.tau, y) - m.position(s.tau + h, samples[i])).norm());
            }
            rep.match("flow_matches_motion", worst, 0.0, s.tolerance("flow", 1e-7));
        }
    }

    {
        auto omega = FormField::polynomial(sampling::random_polyform(std::min(r + 1, n), n, 2, rng));
        if (r + 1 <= n) rep.match("et_contraction_identity", et_contraction_residual(m, omega, s.tau, samples), 0.0, 1e-12);
    }
    if (m.is_smooth()) {
        auto phi = FormField::polynomial(sampling::random_polyform(r, n, 2, rng));
        double e = 1e-4;
        if (s.tau - e >= m.t0() && s.tau + e <= m.t1())
            rep.match("pullback_derivative_identity", pullback_derivative_residual(m, phi, s.tau, e, samples), 0.0,
                      s.tolerance("pullback_derivative", 1e-5));
    }

    // Homotopy formula on a window ending at tau.
    {
        double a = std::max(m.t0(), s.tau - 0.25), b = s.tau;
        if (a == b) b = std::min(m.t1(), s.tau + 0.25);
        FormField phi = s.cochain.empty() ? FormField::polynomial(sampling::random_polyform(r, n, 2, rng))
                                          : detail::cochain_of(s).at(s.tau);
        HomotopyTerms h = homotopy_residual(m, a, b, s.chain, phi, eo);
        rep.match("homotopy_formula", h.endpoint_difference, h.deformation_term + h.boundary_term,
                  s.tolerance("homotopy", 1e-6));
    }

    if (!s.cochain.empty()) {
        Cochain psi = detail::cochain_of(s);
        const bool smooth = m.is_smooth();
        TransportTerms td = transport_derivative(m, s.chain, psi, s.tau, eo);
        auto eps = detail::usable_epsilons(s, smooth, s.epsilons);
        if (eps.size() < 2) {
            rep.fail("transport_fd", "fewer than two usable epsilons around tau");
        } else {
            std::vector<ConvergenceRow> rows;
            for (double e : eps) {
                ConvergenceRow row;
                row.eps = e;
                row.analytic = td.total;
                row.oracle = smooth ? transport_fd_eulerian(m, s.chain, psi, s.tau, e, DifferenceScheme::Central, 0, eo)
                                    : transport_fd_lagrangian(m, s.chain, psi, s.tau, e, DifferenceScheme::Forward, eo);
                row.abs_error = std::abs(row.oracle - row.analytic);
                rows.push_back(row);
            }
            fill_orders(rows);
            const double floor = 1e-11 * std::max(1.0, std::abs(td.total));
            double min_order = std::numeric_limits<double>::infinity();
            bool resolved = false;
            for (const auto& row : rows) {
                rep.info("transport_fd_eps_" + format_number(row.eps), row.oracle, row.analytic);
                if (!std::isnan(row.order) && row.abs_error > floor) {
                    min_order = std::min(min_order, row.order);
                    resolved = true;
                }
            }
            const double need = smooth ? s.tolerance("order_smooth", 1.9) : s.tolerance("order_lipschitz", 0.9);
            if (resolved) rep.at_least("transport_fd_order", min_order, need);
            else rep.match("transport_fd_exact", rows.back().abs_error, 0.0, s.tolerance("transport_exact", 1e-12));
            if (smooth)
                rep.match("transport_fd_at_smallest_eps", rows.back().oracle, td.total, s.tolerance("transport_abs", 1e-5));
        }
        if (smooth && s.tau - 1e-4 >= m.t0() && s.tau + 1e-4 <= m.t1()) {
            rep.match("transport_lagrangian", transport_fd_lagrangian(m, s.chain, psi, s.tau, 1e-4, DifferenceScheme::Central, eo),
                      td.total, s.tolerance("transport_abs", 1e-5));
            rep.match("transport_spatial_form", transport_betounes(m, s.chain, psi, s.tau, eo), td.total,
                      s.tolerance("transport_spatial", 1e-6));
        }
        if (r >= 1) {
            // Manufactured balance law: phi := psi_dot + d xi.
            std::vector<PolyForm<double>> xi_terms{sampling::random_polyform(r - 1, n, 2, rng),
                                                   sampling::random_polyform(r - 1, n, 2, rng)};
            std::vector<PolyForm<double>> phi_terms;
            const std::size_t len = std::max(s.cochain.size(), xi_terms.size());
            for (std::size_t k = 0; k < len; ++k) {
                PolyForm<double> f(r, n);
                if (k + 1 < s.cochain.size()) f += s.cochain[k + 1] * static_cast<double>(k + 1);
                if (k < xi_terms.size()) f += exterior_derivative(xi_terms[k]);
                phi_terms.push_back(f);
            }
            BalanceReport b = balance_transport(m, s.chain, psi, Cochain::polynomial_in_time(xi_terms),
                                                Cochain::polynomial_in_time(phi_terms), s.tau, s.chain.bounding_box(), 9, eo);
            rep.match("balance_law_transport", b.balance, b.transport, s.tolerance("balance", 1e-6));
        }
    }

    // Face fluxes need image chains that vertex mapping reproduces exactly.
    if (r == n && m.is_smooth()) {
        auto one = [](double, const Vec&) { return 1.0; };
        auto zero = [](double, const Vec&) { return 0.0; };
        ClassicalReynolds cr = classical_reynolds(m, s.chain, one, zero, s.tau, 0, eo);
        rep.match("classical_reynolds_flux_form", cr.rhs(), cr.lhs, s.tolerance("reynolds_flux", 1e-6));
    }

    // Continuity in the mass norm: the dual modulus shrinks with epsilon.
    {
        auto eps = detail::usable_epsilons(s, false, s.epsilons);
        if (eps.size() >= 2) {
            Box k = detail::scenario_box(s);
            auto family = polynomial_test_family(r, n, k, 2);
            SeminormOptions so;
            so.resolution = 17;
            auto mod = continuity_modulus(m, s.chain, s.tau, eps, family, k, so, eo);
            double first = mod.front(), last = mod.back();
            rep.bound("continuity_modulus_decay", last, first == 0.0 ? 0.0 : first, 0.0);
        }
    }
}

inline std::vector<ReportRow> run_verify(const ScenarioConfig& s, const RunOptions& o)
{
    Report rep(s.name, o);
    std::mt19937_64 rng(detail::seed_of(s, o));
    try {
        rep.timed([&] { verify_exterior(s, rep, rng); });
        rep.timed([&] { verify_chain_identities(s, rep, rng); });
        rep.timed([&] { verify_flat_ladder(s, rep); });
        if (s.motion) rep.timed([&] { verify_motion(s, rep); });
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        rep.fail("error", e.what());
    }
    return rep.rows();
}

// ---------------------------------------------------------------- transport

struct TransportTable {
    std::vector<ReportRow> checks;
    std::vector<std::vector<std::string>> table; // scenario, eps, analytic, fd, abs_error, order
};

inline TransportTable run_transport(const ScenarioConfig& s, const RunOptions& o)
{
    TransportTable out;
    Report rep(s.name, o);
    if (!s.motion || s.cochain.empty()) return out;
    const Motion& m = *s.motion;
    const bool smooth = m.is_smooth();
    Cochain psi = detail::cochain_of(s);
    try {
        rep.timed([&] {
            auto eps = detail::usable_epsilons(s, smooth, s.epsilons);
            auto scheme = smooth ? DifferenceScheme::Central : DifferenceScheme::Forward;
            std::vector<ConvergenceRow> rows;
            double analytic = transport_derivative(m, s.chain, psi, s.tau).total;
            for (double e : eps) {
                ConvergenceRow row;
                row.eps = e;
                row.analytic = analytic;
                row.oracle = smooth ? transport_fd_eulerian(m, s.chain, psi, s.tau, e, scheme)
                                    : transport_fd_lagrangian(m, s.chain, psi, s.tau, e, scheme);
                row.abs_error = std::abs(row.oracle - analytic);
                rows.push_back(row);
            }
            fill_orders(rows);
            const double floor = 1e-11 * std::max(1.0, std::abs(analytic));
            double min_order = std::numeric_limits<double>::infinity();
            bool resolved = false;
            for (const auto& row : rows) {
                out.table.push_back({s.name, format_number(row.eps), format_number(row.analytic), format_number(row.oracle),
                                     format_number(row.abs_error), std::isnan(row.order) ? "" : format_number(row.order)});
                if (!std::isnan(row.order) && row.abs_error > floor) {
                    min_order = std::min(min_order, row.order);
                    resolved = true;
                }
            }
            if (rows.size() < 2) rep.fail("transport_order", "fewer than two usable epsilons");
            else if (resolved)
                rep.at_least("transport_fd_order", min_order, smooth ? s.tolerance("order_smooth", 1.9) : s.tolerance("order_lipschitz", 0.9));
            else rep.match("transport_derivative_exact", rows.back().oracle, analytic, s.tolerance("transport_exact", 1e-12));
        });
        if (s.chain.degree() == s.chain.ambient() && smooth) {
            rep.timed([&] {
                auto one = [](double, const Vec&) { return 1.0; };
                auto zero = [](double, const Vec&) { return 0.0; };
                ClassicalReynolds cr = classical_reynolds(m, s.chain, one, zero, s.tau);
                rep.info("reynolds_volume_term", cr.volume_term);
                rep.info("reynolds_flux_term", cr.flux_term);
                rep.match("reynolds_lhs_vs_rhs", cr.rhs(), cr.lhs, s.tolerance("reynolds_flux", 1e-6));
            });
        }
    } catch (const std::exception& e) {
        rep.fail("error", e.what());
    }
    out.checks = rep.rows();
    return out;
}

// ---------------------------------------------------------------- flatnorm

struct FlatNormOutput {
    std::vector<ReportRow> checks;
    std::vector<std::string> summary; // scenario, F, M(R), M(S), mass, iterations
    std::vector<std::vector<std::string>> decomposition;
    std::string lp_text;
};

inline FlatNormOutput run_flatnorm(const ScenarioConfig& s, const RunOptions& o)
{
    FlatNormOutput out;
    Report rep(s.name, o);
    if (!s.complex) return out;
    try {
        rep.timed([&] {
            SimplicialComplex x = SimplicialComplex::freudenthal(s.complex->box, s.complex->resolution);
            FlatNormResult res = flat_norm_lp(s.chain, x);
            double m = mass(s.chain);
            out.summary = {s.name, format_number(res.value), format_number(res.mass_r), format_number(res.mass_s),
                           format_number(m), std::to_string(res.iterations)};
            rep.bound("flat_norm_le_mass", res.value, m, s.tolerance("ladder_slack", 1e-6));
            rep.match("flat_norm_decomposition", res.mass_r + res.mass_s, res.value, 1e-8);
            if (s.tolerances.count("flat_norm_expected"))
                rep.match("flat_norm_expected", res.value, s.tolerances.at("flat_norm_expected"), s.tolerance("flat_norm_abs", 1e-8));
            else rep.info("flat_norm", res.value);
            auto emit = [&](const std::string& part, const Chain& c) {
                for (const auto& [idx, mult] : c.term_map()) {
                    std::string verts;
                    for (std::size_t i = 0; i < idx.size(); ++i) {
                        const Vec& p = c.vertices()[static_cast<std::size_t>(idx[i])];
                        if (i) verts += ';';
                        for (Eigen::Index d = 0; d < p.size(); ++d) verts += (d ? " " : "") + format_number(p[d]);
                    }
                    out.decomposition.push_back({s.name, part, std::to_string(c.degree()), format_number(mult), verts});
                }
            };
            emit("R", res.r);
            emit("S", res.s);
            if (s.export_lp) {
                const int r = s.chain.degree();
                Vec tc = x.coefficients(s.chain);
                const bool cells = !x.simplices(r + 1).empty();
                LPProblem p = flat_norm_problem(tc, cells ? x.boundary_matrix(r) : Mat(tc.size(), 0), x.volumes(r),
                                                cells ? x.volumes(r + 1) : Vec());
                std::ostringstream os;
                write_lp(os, p);
                out.lp_text = os.str();
            }
        });
    } catch (const std::exception& e) {
        rep.fail("error", e.what());
    }
    out.checks = rep.rows();
    return out;
}

// ---------------------------------------------------------------- converge

struct ConvergeRow {
    std::string scenario, study, parameter;
    double x = 0.0, value = 0.0, error = 0.0;
    double order = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergeOutput {
    std::vector<ReportRow> checks;
    std::vector<ConvergeRow> table;
};

inline ConvergeOutput run_converge(const ScenarioConfig& s, const RunOptions& o)
{
    ConvergeOutput out;
    Report rep(s.name, o);
    const int r = s.chain.degree(), n = s.chain.ambient();
    std::mt19937_64 rng(detail::seed_of(s, o));
    auto add_series = [&](const std::string& study, const std::string& param, const std::vector<double>& xs,
                          const std::vector<double>& vals, const std::vector<double>& errs) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            ConvergeRow row{s.name, study, param, xs[i], vals[i], errs[i]};
            if (i > 0 && errs[i] > 0 && errs[i - 1] > 0) row.order = std::log(errs[i - 1] / errs[i]) / std::log(xs[i - 1] / xs[i]);
            out.table.push_back(row);
        }
    };
    try {
        // Adjointness residual for a non-polynomial form under subdivision.
        if (r >= 1) {
            rep.timed([&] {
                auto trig = sampling::random_trig_form(r - 1, n, rng, 3.0);
                Current t = Current::leaf(s.chain);
                std::vector<double> hs, vals, errs;
                for (int level : s.levels) {
                    EvalOptions eo{level};
                    double lhs = evaluate(boundary(t), trig.form, eo);
                    double rhs = evaluate(t, trig.derivative, eo);
                    hs.push_back(std::ldexp(1.0, -level));
                    vals.push_back(lhs);
                    errs.push_back(std::abs(lhs - rhs));
                }
                add_series("adjointness_vs_subdivision", "h", hs, vals, errs);
                double slope = detail::loglog_slope(hs, errs, 1e-13);
                if (std::isnan(slope)) rep.match("adjointness_residual_floor", errs.front(), 0.0, 1e-12);
                else rep.at_least("adjointness_order", slope, s.tolerance("adjointness_order", 2.0));
            });
        }
        // Grid estimates of the seminorms of a fixed form (reported, not asserted).
        rep.timed([&] {
            FormField phi = s.cochain.empty() ? FormField::polynomial(sampling::random_polyform(r, n, 2, rng))
                                              : detail::cochain_of(s).at(s.tau);
            Box k = detail::scenario_box(s);
            std::vector<double> res, comass, sharp, diff;
            for (int g : {5, 9, 17, 33}) {
                SeminormOptions so;
                so.resolution = g;
                so.seed = detail::seed_of(s, o);
                res.push_back(static_cast<double>(g));
                comass.push_back(seminorm_comass(phi, k, so).value);
                sharp.push_back(seminorm_sharp(phi, k, so).value);
            }
            for (std::size_t i = 0; i < sharp.size(); ++i) diff.push_back(std::abs(sharp.back() - sharp[i]));
            std::vector<double> cdiff;
            for (double c : comass) cdiff.push_back(std::abs(comass.back() - c));
            add_series("comass_vs_grid", "points_per_axis", res, comass, cdiff);
            add_series("sharp_vs_grid", "points_per_axis", res, sharp, diff);
            rep.info("sharp_norm_estimate", sharp.back());
        });
        if (s.motion) {
            const Motion& m = *s.motion;
            // Homotopy residual under time-panel refinement with a two-point rule.
            rep.timed([&] {
                FormField phi = s.cochain.empty() ? FormField::polynomial(sampling::random_polyform(r, n, 2, rng))
                                                  : detail::cochain_of(s).at(s.tau);
                double a = std::max(m.t0(), s.tau - 0.5), b = std::min(m.t1(), s.tau + 0.5);
                std::vector<double> hs, vals, errs;
                for (int panels : {1, 2, 4, 8}) {
                    TimeQuadrature q;
                    q.adaptive = false;
                    q.points = 2;
                    q.panels = panels;
                    HomotopyTerms h = homotopy_residual(m, a, b, s.chain, phi, {}, q);
                    hs.push_back((b - a) / panels);
                    vals.push_back(h.endpoint_difference);
                    errs.push_back(h.residual);
                }
                add_series("homotopy_vs_time_panels", "dt", hs, vals, errs);
                double slope = detail::loglog_slope(hs, errs, 1e-12);
                if (std::isnan(slope)) rep.match("homotopy_residual_floor", errs.front(), 0.0, 1e-10);
                else rep.at_least("homotopy_order", slope, s.tolerance("homotopy_order", 2.0));
            });
            // Mass-norm continuity modulus against epsilon.
            rep.timed([&] {
                std::vector<double> ladder{1e-1, 1e-2, 1e-3, 1e-4};
                auto eps = detail::usable_epsilons(s, false, ladder);
                if (eps.size() < 2) return;
                Box k = detail::scenario_box(s);
                SeminormOptions so;
                so.resolution = 17;
                auto mod = continuity_modulus(m, s.chain, s.tau, eps, polynomial_test_family(r, n, k, 2), k, so);
                add_series("continuity_modulus_vs_eps", "eps", eps, mod, mod);
                double slope = detail::loglog_slope(eps, mod, 1e-14);
                if (std::isnan(slope)) rep.match("continuity_modulus_zero", mod.front(), 0.0, 1e-12);
                else if (m.is_smooth()) rep.match("continuity_slope", slope, 1.0, s.tolerance("continuity_slope", 0.1));
                else rep.bound("continuity_modulus_decay", mod.back(), mod.front(), 0.0);
            });
            // Transport derivative against the epsilon ladder.
            if (!s.cochain.empty()) {
                rep.timed([&] {
                    const bool smooth = m.is_smooth();
                    Cochain psi = detail::cochain_of(s);
                    auto eps = detail::usable_epsilons(s, smooth, s.epsilons);
                    double analytic = transport_derivative(m, s.chain, psi, s.tau).total;
                    std::vector<double> vals, errs;
                    for (double e : eps) {
                        double fd = smooth ? transport_fd_eulerian(m, s.chain, psi, s.tau, e)
                                           : transport_fd_lagrangian(m, s.chain, psi, s.tau, e, DifferenceScheme::Forward);
                        vals.push_back(fd);
                        errs.push_back(std::abs(fd - analytic));
                    }
                    add_series("transport_vs_eps", "eps", eps, vals, errs);
                    double slope = detail::loglog_slope(eps, errs, 1e-11 * std::max(1.0, std::abs(analytic)));
                    if (std::isnan(slope)) rep.match("transport_exact", errs.empty() ? 0.0 : errs.back(), 0.0, 1e-12);
                    else rep.at_least("transport_order", slope, smooth ? s.tolerance("order_smooth", 1.9) : s.tolerance("order_lipschitz", 0.9));
                });
            }
        }
    } catch (const std::exception& e) {
        rep.fail("error", e.what());
    }
    out.checks = rep.rows();
    return out;
}

// ---------------------------------------------------------------- reports

inline const std::vector<std::string>& report_header()
{
    static const std::vector<std::string> h{"scenario", "quantity", "value",     "oracle", "abs_error",
                                            "rel_error", "level",   "tolerance", "rule",   "pass"};
    return h;
}

inline std::vector<std::string> report_fields(const ReportRow& r)
{
    return {r.scenario,
            r.quantity,
            format_number(r.value),
            std::isnan(r.oracle) ? "" : format_number(r.oracle),
            format_number(r.abs_error),
            format_number(r.rel_error),
            r.level < 0 ? "" : std::to_string(r.level),
            r.rule == Rule::Info ? "" : format_number(r.tolerance),
            detail::rule_name(r.rule),
            r.pass ? "1" : "0"};
}

inline void write_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows)
{
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error("cannot write " + file.string());
    auto line = [&](const std::vector<std::string>& f) {
        for (std::size_t i = 0; i < f.size(); ++i) out << (i ? "," : "") << csv_escape(f[i]);
        out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
}

/// Runs `job` over the scenarios on up to `workers` threads; results keep the
/// scenario order.
template <class Result, class Job>
std::vector<Result> run_parallel(const std::vector<ScenarioConfig>& scenarios, int workers, Job job)
{
    std::vector<Result> results(scenarios.size());
    std::vector<std::exception_ptr> errors(scenarios.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < scenarios.size(); i = next++) {
            try {
                results[i] = job(scenarios[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int k = std::max(1, std::min<int>(workers, static_cast<int>(scenarios.size())));
    std::vector<std::thread> pool;
    for (int i = 1; i < k; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

} // namespace currentkit

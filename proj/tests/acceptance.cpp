// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on failure.

#include "currentkit/harness.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

using namespace currentkit;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail << " [" << what << "]";
        }
    }
};

Vec point(std::initializer_list<double> v)
{
    Vec x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double c : v) x[i++] = c;
    return x;
}

std::vector<Vec> reference_simplex(int n)
{
    std::vector<Vec> pts{Vec::Zero(n)};
    for (int i = 0; i < n; ++i) pts.push_back(Vec::Unit(n, i));
    return pts;
}

Chain unit_square() { return box_chain(Box::cube(2, 0, 1), 1); }

Cutoff plateau() { return Cutoff{Box::cube(2, -0.5, 1.5), 1.0}; }

double max_coefficient(const PolyForm<double>& f)
{
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        for (const auto& [e, c] : f.component(i).terms()) m = std::max(m, std::abs(c));
    return m;
}

Chain random_chain(int r, int n, int count, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1, 1);
    Chain c(r, n);
    for (int k = 0; k < count; ++k) {
        std::vector<Vec> pts;
        for (int i = 0; i <= r; ++i) {
            Vec p(n);
            for (int j = 0; j < n; ++j) p[j] = u(rng);
            pts.push_back(p);
        }
        c.add_simplex_points(pts, u(rng));
    }
    return c;
}

const ScenarioConfig& scenario(const std::vector<ScenarioConfig>& all, const std::string& name)
{
    for (const auto& s : all)
        if (s.name == name) return s;
    throw Error("bundled scenario missing: " + name);
}

// ------------------------------------------------------------------ criteria

void exterior_identities(Outcome& o)
{
    std::mt19937_64 rng(101);
    double dd = 0.0, cartan = 0.0;
    int pairs = 0;
    for (int n = 1; n <= 4; ++n) {
        for (int trial = 0; trial < 15; ++trial, ++pairs) {
            const int r = static_cast<int>(rng() % static_cast<std::uint64_t>(n + 1));
            auto phi = sampling::random_polyform(r, n, 3, rng, true);
            auto v = sampling::random_polymap(n, 2, rng, true);
            if (r + 2 <= n) dd = std::max(dd, max_coefficient(exterior_derivative(exterior_derivative(phi))));
            cartan = std::max(cartan, max_coefficient(lie_derivative_components(phi, v) - lie_derivative(phi, v)));
        }
    }
    o.detail << "pairs=" << pairs << " max|dd|=" << dd << " max|cartan|=" << cartan;
    o.require(pairs >= 50, "too few pairs");
    o.require(dd == 0.0, "d o d nonzero");
    o.require(cartan == 0.0, "cartan residual nonzero");
}

void boundary_adjointness(Outcome& o)
{
    std::mt19937_64 rng(202);
    double poly_worst = 0.0, min_order = kInf, finest = 0.0;
    for (int n : {2, 3}) {
        std::vector<Chain> chains{simplex_chain(reference_simplex(n)), random_chain(n, n, 3, rng)};
        for (const auto& c : chains) {
            const Current t = Current::leaf(c);
            for (int trial = 0; trial < 5; ++trial) {
                auto phi = sampling::random_polyform(n - 1, n, 3, rng);
                const double lhs = evaluate(boundary(t), FormField::polynomial(phi));
                const double rhs = evaluate(t, FormField::polynomial(exterior_derivative(phi)));
                poly_worst = std::max(poly_worst, std::abs(lhs - rhs));
            }
        }
        // Polynomial data are integrated exactly, so the order is measured on
        // trigonometric forms where quadrature error is visible.
        auto t = simplex_chain(reference_simplex(n));
        auto tf = sampling::random_trig_form(n - 1, n, rng, 3.0);
        std::vector<double> h, err;
        for (int level = 0; level <= 3; ++level) {
            h.push_back(std::ldexp(1.0, -level));
            err.push_back(std::abs(evaluate(boundary(t), tf.form, {level}) - evaluate(t, tf.derivative, {level})));
        }
        min_order = std::min(min_order, oracle::loglog_slope(h, err));
        finest = std::max(finest, err.back());
    }
    o.detail << "poly_residual=" << poly_worst << " trig_finest=" << finest << " order=" << min_order;
    o.require(poly_worst <= 1e-8, "polynomial residual");
    o.require(finest <= 1e-8, "trig residual at finest level");
    o.require(min_order >= 2.0, "order");
}

void flat_norm(Outcome& o)
{
    for (int res : {4, 8}) {
        auto x = SimplicialComplex::freudenthal(Box::cube(2, 0, 1), res);
        const double f = flat_norm_lp(boundary(box_chain(Box::cube(2, 0, 1), res)), x).value;
        // Analytic: min(perimeter, area) = min(4, 1).
        o.detail << "F(res=" << res << ")=" << f << " ";
        o.require(std::abs(f - 1.0) <= 1e-8, "square boundary at res " + std::to_string(res));
    }
    for (int res : {1, 2}) {
        auto x = SimplicialComplex::freudenthal(Box::cube(2, 0, 1), res);
        Chain t = boundary(box_chain(Box::cube(2, 0, 1), res));
        const double brute = oracle::flat_norm_bruteforce(x.coefficients(t), x.boundary_matrix(1), x.volumes(1), x.volumes(2), 1);
        const double lp = flat_norm_lp(t, x).value;
        o.require(std::abs(lp - brute) <= 1e-8, "brute force at res " + std::to_string(res));
    }

    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> u(-1, 1);
    auto x = SimplicialComplex::freudenthal(Box::cube(2, 0, 1), 3);
    int checked = 0;
    double worst_mass = -kInf, worst_boundary = -kInf;
    for (int trial = 0; trial < 20; ++trial, ++checked) {
        const int r = 1 + trial % 2;
        Vec c(static_cast<Eigen::Index>(x.simplices(r).size()));
        for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = u(rng);
        Chain t = x.chain_from(r, c);
        const double ft = flat_norm_lp(t, x).value;
        const double fbt = flat_norm_lp(boundary(t), x).value;
        worst_mass = std::max(worst_mass, ft - mass(t));
        worst_boundary = std::max(worst_boundary, fbt - ft);
    }
    o.detail << "random=" << checked << " max(F-M)=" << worst_mass << " max(F(dT)-F(T))=" << worst_boundary;
    o.require(worst_mass <= 1e-9, "F <= M");
    o.require(worst_boundary <= 1e-9, "F(dT) <= F(T)");
}

void pushforward_bounds(Outcome& o)
{
    std::mt19937_64 rng(404);
    double worst = -kInf;
    bool commutes = true;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 2;
        const int r = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n));
        auto t = random_chain(r, n, 4, rng);
        auto f = sampling::random_affine(n, rng);
        const double lip = lipschitz_constant(f, t.bounding_box(0.1)).value;
        auto ft = pushforward_chain(f, t).chain;
        worst = std::max(worst, mass(ft) - std::pow(lip, r) * mass(t));
        Chain diff = boundary(ft) - pushforward_chain(f, boundary(t)).chain;
        commutes = commutes && diff.empty();
    }
    o.detail << "max(M(f#T) - Lip^r M(T))=" << worst << " boundary_commutes=" << commutes;
    o.require(worst <= 1e-6, "mass bound");
    o.require(commutes, "boundary commutation");
}

void reynolds_duality(Outcome& o)
{
    std::mt19937_64 rng(505);
    std::vector<Chain> chains{unit_square(), boundary(unit_square()), simplex_chain(reference_simplex(2), 1.5),
                              boundary(simplex_chain(reference_simplex(2)))};
    double worst = 0.0;
    int pairs = 0;
    for (int trial = 0; trial < 10; ++trial) {
        for (const auto& c : chains) {
            const Current t = Current::leaf(c);
            auto phi = sampling::random_polyform(c.degree(), 2, 2, rng);
            auto v = sampling::random_polymap(2, 2, rng);
            const double lhs = evaluate(reynolds_operator(VectorField::polynomial(v), t), FormField::polynomial(phi));
            const double rhs = evaluate(t, FormField::polynomial(lie_derivative(phi, v)));
            worst = std::max(worst, std::abs(lhs - rhs));
            ++pairs;
        }
    }
    o.detail << "pairs=" << pairs << " max residual=" << worst;
    o.require(pairs >= 30, "too few pairs");
    o.require(worst <= 1e-8, "duality residual");
}

void homotopy(Outcome& o)
{
    std::mt19937_64 rng(606);
    std::vector<Motion> ms{motions::translation(point({0.3, 0.1}), plateau()),
                           motions::twist(point({0.3, 0.2}), 1.0, 1.2, 1.8),
                           motions::shear(2, 0.5, plateau(), -0.2, 0.2)};
    double worst = 0.0;
    for (const auto& m : ms)
        for (int r : {1, 2}) {
            Chain t = r == 2 ? unit_square() : boundary(unit_square());
            auto phi = FormField::polynomial(sampling::random_polyform(r, 2, 2, rng));
            worst = std::max(worst, homotopy_residual(m, 0.0, 0.15, t, phi).residual);
        }
    // Translation and shear are polynomial in time and integrate exactly, so
    // the refinement order is observed on the rotation.
    auto phi = FormField::polynomial(sampling::random_polyform(1, 2, 2, rng));
    std::vector<double> h, res;
    for (int panels : {1, 2, 4}) {
        TimeQuadrature q;
        q.panels = panels;
        q.points = 2;
        q.adaptive = false;
        h.push_back(1.0 / panels);
        res.push_back(homotopy_residual(ms[1], 0.0, 0.6, boundary(unit_square()), phi, {}, q).residual);
    }
    const double order = oracle::loglog_slope(h, res);
    o.detail << "max residual=" << worst << " rotation order=" << order;
    o.require(worst <= 1e-6, "residual");
    o.require(order >= 2.0, "order");
}

void transport(Outcome& o, const std::vector<ScenarioConfig>& all)
{
    const std::vector<double> eps{1e-2, 1e-3, 1e-4};
    for (const char* name : {"rotating_polyline", "rotating_square", "translation", "shear"}) {
        const auto& s = scenario(all, name);
        auto rows = transport_fd_ladder(*s.motion, s.chain, detail::cochain_of(s), s.tau, eps, DifferenceScheme::Central);
        std::vector<double> e, err;
        for (const auto& r : rows) {
            e.push_back(r.eps);
            err.push_back(r.abs_error);
        }
        const double floor = 1e-11 * std::max(1.0, std::abs(rows.front().analytic));
        const bool resolved = err.front() > floor;
        const double order = resolved ? detail::loglog_slope(e, err, floor) : kInf;
        o.detail << name << ": order=" << (resolved ? format_number(order) : std::string("exact")) << " err(1e-4)="
                 << err.back() << "; ";
        o.require(order >= 1.9, std::string(name) + " order");
        o.require(err.back() <= 1e-5, std::string(name) + " abs error");
    }
    const auto& s = scenario(all, "tent");
    const Motion& m = *s.motion;
    Cochain psi = detail::cochain_of(s);
    const double analytic = transport_derivative(m, s.chain, psi, s.tau).total;
    std::vector<double> err;
    for (double e : eps)
        err.push_back(std::abs(transport_fd_lagrangian(m, s.chain, psi, s.tau, e, DifferenceScheme::Forward) - analytic));
    const double order = oracle::loglog_slope(eps, err);
    o.detail << "tent: order=" << order;
    o.require(order >= 0.9, "tent order");
}

void classical_reynolds_recovery(Outcome& o)
{
    auto m = motions::expansion(2, Cutoff{Box::cube(2, -0.25, 1.25), 1.0});
    Cochain one = Cochain::constant(FormField::constant(MultiIndex({0, 1}, 2)));
    const double derivative = transport_derivative(m, unit_square(), one, 0.0).total;
    auto rho = [](double, const Vec&) { return 1.0; };
    auto rho_dot = [](double, const Vec&) { return 0.0; };
    ClassicalReynolds cr = classical_reynolds(m, unit_square(), rho, rho_dot, 0.0);
    o.detail << "derivative=" << derivative << " lhs=" << cr.lhs << " rhs=" << cr.rhs();
    o.require(std::abs(derivative - 2.0) <= 1e-6, "derivative");
    o.require(std::abs(cr.lhs - 2.0) <= 1e-6, "lhs");
    o.require(std::abs(cr.rhs() - cr.lhs) <= 1e-6, "flux form");
}

void continuity(Outcome& o)
{
    SeminormOptions so;
    so.resolution = 9;
    {
        auto m = motions::translation(point({0.3, 0.1}), plateau());
        const Box k = Box::cube(2, -0.5, 1.5);
        std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
        auto mod = continuity_modulus(m, unit_square(), 0.0, eps, polynomial_test_family(2, 2, k, 2), k, so);
        const double slope = oracle::loglog_slope(eps, mod);
        o.detail << "translation slope=" << slope << " ";
        o.require(std::abs(slope - 1.0) <= 0.1, "translation slope");
    }
    {
        auto m = motions::tent(point({0.5, 0.5}), 0.6, 0.5, point({1.0, 0.5}));
        const Box k = Box::cube(2, -0.2, 1.2);
        Chain poly(1, 2);
        poly.add_simplex_points({point({0.1, 0.2}), point({0.5, 0.3})}, 1.0);
        poly.add_simplex_points({point({0.5, 0.3}), point({0.8, 0.7})}, 1.0);
        auto mod = continuity_modulus(m, poly, 0.1, {1e-1, 1e-2, 1e-3, 1e-4}, polynomial_test_family(1, 2, k, 2), k, so);
        bool decreasing = true;
        for (std::size_t i = 1; i < mod.size(); ++i) decreasing = decreasing && mod[i] < mod[i - 1];
        o.detail << "tent modulus " << mod.front() << " -> " << mod.back();
        o.require(decreasing, "tent modulus not decreasing");
        o.require(mod.back() <= 1e-2 * mod.front(), "tent modulus does not tend to 0");
    }
}

void norm_ladder(Outcome& o)
{
    const double slack = 1e-6;
    const Box k = Box::cube(2, 0, 1);
    SeminormOptions so;
    so.resolution = 17;
    int full = 0, partial = 0;
    for (const auto& entry : std::filesystem::directory_iterator("scenarios/chains")) {
        if (entry.path().extension() != ".json") continue;
        Chain c = load_chain(entry.path());
        const int r = c.degree(), n = c.ambient();
        Box kk = k;
        for (const auto& p : c.vertices())
            for (int i = 0; i < n; ++i) {
                kk.lower[i] = std::min(kk.lower[i], p[i]);
                kk.upper[i] = std::max(kk.upper[i], p[i]);
            }
        auto family = polynomial_test_family(r, n, kk, 3);
        const Current t = Current::leaf(c);
        const double sharp = sharp_lower_bound(t, family, kk, so).value;
        const double dual = dual_flat_lower_bound(t, family, kk, so).value;
        const double m = mass(c);
        const std::string name = entry.path().stem().string();
        o.require(sharp <= dual + slack, name + ": sharp <= dual");
        o.require(dual <= m + slack, name + ": dual <= mass");
        // The LP rung needs a Freudenthal complex carrying the chain.
        std::optional<double> lp;
        for (int res : {1, 2, 4, 8, 16}) {
            try {
                lp = flat_norm_lp(c, SimplicialComplex::freudenthal(kk, res)).value;
                break;
            } catch (const DomainError&) {
            }
        }
        if (lp) {
            ++full;
            o.require(dual <= *lp + slack, name + ": dual <= flat");
            o.require(*lp <= m + slack, name + ": flat <= mass");
        } else {
            ++partial;
        }
        o.detail << name << "(" << sharp << "," << dual << "," << (lp ? format_number(*lp) : std::string("-")) << ","
                 << m << ") ";
    }
    o.detail << "full=" << full << " without_lp=" << partial;
    o.require(full > 0, "no chain checked against the LP");
}

} // namespace

int main()
{
    std::vector<ScenarioConfig> all;
    try {
        all = load_scenarios("scenarios/suite.json");
    } catch (const std::exception& e) {
        std::cerr << "cannot load scenarios: " << e.what() << "\n";
        return 2;
    }

    struct Entry {
        int id;
        const char* name;
        std::function<void(Outcome&)> run;
    };
    const std::vector<Entry> entries{
        {1, "exterior_identities", exterior_identities},
        {2, "boundary_adjointness", boundary_adjointness},
        {3, "flat_norm_lp", flat_norm},
        {4, "pushforward_bounds", pushforward_bounds},
        {5, "reynolds_duality", reynolds_duality},
        {6, "homotopy_formula", homotopy},
        {7, "transport_theorem", [&](Outcome& o) { transport(o, all); }},
        {8, "classical_reynolds", classical_reynolds_recovery},
        {9, "continuity_modulus", continuity},
        {10, "norm_ladder", norm_ladder},
    };

    int failures = 0;
    for (const auto& e : entries) {
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            e.run(o);
        } catch (const std::exception& ex) {
            o.pass = false;
            o.detail << " [exception: " << ex.what() << "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass) ++failures;
        std::printf("%s %d %s (%.2fs) %s\n", o.pass ? "PASS" : "FAIL", e.id, e.name, secs, o.detail.str().c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}

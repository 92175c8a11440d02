#pragma once

// Motions t -> kappa_t: time-indexed Lipschitz embeddings that are the identity
// outside a fixed box K_m, with material velocity, Jacobian and inverse.

#include "lipschitz.hpp"

namespace currentkit {

class Motion {
public:
    using PointFn = std::function<Vec(double, const Vec&)>;
    using JacobianFn = std::function<Mat(double, const Vec&)>;

    Motion() = default;
    Motion(std::string name, int dim, double t0, double t1, Box support, PointFn position, PointFn velocity,
           JacobianFn jacobian = {}, PointFn inverse = {}, PointFn inverse_guess = {})
        : name_(std::move(name)), dim_(dim), t0_(t0), t1_(t1), support_(std::move(support)), position_(std::move(position)),
          velocity_(std::move(velocity)), jacobian_(std::move(jacobian)), inverse_(std::move(inverse)),
          inverse_guess_(std::move(inverse_guess))
    {
        if (!(t0 < t1)) throw Error("motion time interval must be nonempty");
        if (support_.dim() != dim) throw DegreeError("motion support dimension mismatch");
    }

    const std::string& name() const { return name_; }
    int dim() const { return dim_; }
    double t0() const { return t0_; }
    double t1() const { return t1_; }
    /// K_m; kappa_t maps it onto itself.
    const Box& support() const { return support_; }
    bool is_smooth() const { return smooth_; }
    /// Hyperplanes off which the motion is smooth (empty for smooth motions).
    const std::vector<Hyperplane>& kinks() const { return kinks_; }
    Motion& set_kinks(std::vector<Hyperplane> k)
    {
        kinks_ = std::move(k);
        return *this;
    }
    Motion& set_smooth(bool s)
    {
        smooth_ = s;
        return *this;
    }

    void check_time(double t) const
    {
        const double tol = 1e-12 * (t1_ - t0_);
        if (t < t0_ - tol || t > t1_ + tol) throw DomainError("time outside the motion's interval");
    }

    Vec position(double t, const Vec& x) const
    {
        check_time(t);
        if (!support_.contains(x)) return x;
        return position_(t, x);
    }

    /// Material velocity d/dt kappa_t(x).
    Vec velocity(double t, const Vec& x) const
    {
        check_time(t);
        if (!support_.contains(x)) return Vec::Zero(dim_);
        return velocity_(t, x);
    }

    Mat jacobian(double t, const Vec& x) const
    {
        check_time(t);
        if (!support_.contains(x)) return Mat::Identity(dim_, dim_);
        if (jacobian_) return jacobian_(t, x);
        const double h = 1e-6;
        Mat j(dim_, dim_);
        for (int k = 0; k < dim_; ++k) {
            Vec xp = x, xm = x;
            xp[k] += h;
            xm[k] -= h;
            j.col(k) = (position(t, xp) - position(t, xm)) / (2 * h);
        }
        return j;
    }

    /// eta_t(y) = kappa_t^{-1}(y): closed form when the family provides it,
    /// else damped Newton from the family's guess or the nearest mapped grid
    /// point, to 1e-12.
    Vec inverse(double t, const Vec& y) const
    {
        check_time(t);
        if (!support_.contains(y)) return y;
        if (inverse_) return inverse_(t, y);
        Vec x = inverse_guess_ ? inverse_guess_(t, y) : nearest_mapped(t, y);
        const double tol = 1e-12 * std::max(1.0, y.norm());
        Vec res = position(t, x) - y;
        for (int it = 0; it < 100 && res.norm() > tol; ++it) {
            Vec step = jacobian(t, x).fullPivLu().solve(res);
            double alpha = 1.0;
            Vec cand = x - step;
            Vec cres = position(t, cand) - y;
            while (cres.norm() >= res.norm() && alpha > 1e-8) {
                alpha *= 0.5;
                cand = x - alpha * step;
                cres = position(t, cand) - y;
            }
            x = cand;
            res = cres;
        }
        if (!(res.norm() <= 1e3 * tol)) throw NumericalError("motion inverse: Newton iteration did not converge");
        return x;
    }

    LipMap map_at(double t) const
    {
        Motion self = *this;
        LipMap m(
            dim_, [self, t](const Vec& x) { return self.position(t, x); },
            [self, t](const Vec& x) { return self.jacobian(t, x); }, name_ + "_t");
        m.identity_outside(support_);
        return m;
    }

    /// Eulerian velocity v_t = kappa_dot_t o eta_t, zero outside K_m.
    VectorField eulerian_velocity(double t) const
    {
        Motion self = *this;
        return VectorField(dim_, [self, t](const Vec& y) { return self.velocity(t, self.inverse(t, y)); });
    }

private:
    Vec nearest_mapped(double t, const Vec& y) const
    {
        Vec best = y;
        double bd = kInf;
        for (const auto& x : grid_points(support_, 9)) {
            double d = (position(t, x) - y).norm();
            if (d < bd) {
                bd = d;
                best = x;
            }
        }
        return best;
    }

    std::string name_;
    int dim_ = 0;
    double t0_ = 0.0, t1_ = 1.0;
    Box support_;
    PointFn position_, velocity_;
    JacobianFn jacobian_;
    PointFn inverse_, inverse_guess_;
    bool smooth_ = true;
    std::vector<Hyperplane> kinks_;
};

/// Smooth cutoff equal to 1 on `inner` and 0 outside `inner` grown by `margin`;
/// a product of quintic smoothsteps (C^2).
struct Cutoff {
    Box inner;
    double margin = 0.25;

    Box outer() const { return inner.inflated(margin); }

    static double step(double z)
    {
        if (z <= 0.0) return 0.0;
        if (z >= 1.0) return 1.0;
        return z * z * z * (z * (6 * z - 15) + 10);
    }
    static double step_derivative(double z)
    {
        if (z <= 0.0 || z >= 1.0) return 0.0;
        return 30 * z * z * (1 - z) * (1 - z);
    }

    double axis(double s, int i, double* deriv) const
    {
        const double lo = inner.lower[i], hi = inner.upper[i];
        if (s < lo) {
            double z = (s - (lo - margin)) / margin;
            *deriv = step_derivative(z) / margin;
            return step(z);
        }
        if (s > hi) {
            double z = ((hi + margin) - s) / margin;
            *deriv = -step_derivative(z) / margin;
            return step(z);
        }
        *deriv = 0.0;
        return 1.0;
    }

    double value(const Vec& x) const
    {
        double v = 1.0, d;
        for (int i = 0; i < x.size(); ++i) v *= axis(x[i], i, &d);
        return v;
    }

    Vec gradient(const Vec& x) const
    {
        const auto n = x.size();
        Vec vals(n), ders(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double d;
            vals[i] = axis(x[i], static_cast<int>(i), &d);
            ders[i] = d;
        }
        Vec g(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double p = ders[i];
            for (Eigen::Index j = 0; j < n; ++j)
                if (j != i) p *= vals[j];
            g[i] = p;
        }
        return g;
    }

    /// Upper bound for |grad chi|.
    double gradient_bound(int n) const { return std::sqrt(static_cast<double>(n)) * 1.875 / margin; }
};

namespace motions {

inline Motion identity(int n, const Box& support, double t0 = -1.0, double t1 = 1.0)
{
    return Motion(
        "identity", n, t0, t1, support, [](double, const Vec& x) { return x; },
        [n](double, const Vec&) { return Vec(Vec::Zero(n)); }, [n](double, const Vec&) { return Mat(Mat::Identity(n, n)); },
        [](double, const Vec& y) { return y; });
}

/// x + g(t) chi(x) a(x) with a linear profile a(x) = A x + b; covers
/// translation (A = 0), shear and expansion. Rigid on the cutoff plateau.
inline Motion cutoff_linear(std::string name, const Cutoff& chi, const Mat& a, const Vec& b, std::function<double(double)> g,
                            std::function<double(double)> g_dot, double t0, double t1)
{
    const int n = static_cast<int>(b.size());
    auto pos = [chi, a, b, g](double t, const Vec& x) -> Vec { return x + g(t) * chi.value(x) * (a * x + b); };
    auto vel = [chi, a, b, g_dot](double t, const Vec& x) -> Vec { return g_dot(t) * chi.value(x) * (a * x + b); };
    auto jac = [chi, a, b, g, n](double t, const Vec& x) -> Mat {
        return Mat::Identity(n, n) + g(t) * (chi.value(x) * a + (a * x + b) * chi.gradient(x).transpose());
    };
    // On the plateau the map is x + g (A x + b); invert that as the Newton start.
    auto guess = [a, b, g, n](double t, const Vec& y) -> Vec {
        Mat m = Mat::Identity(n, n) + g(t) * a;
        return m.fullPivLu().solve(y - g(t) * b);
    };
    double gmax = std::max(std::abs(g(t0)), std::abs(g(t1)));
    double amax = 0.0;
    for (const auto& x : grid_points(chi.outer(), 5)) amax = std::max(amax, (a * x + b).norm());
    Eigen::JacobiSVD<Mat> svd(a);
    double bound = gmax * (svd.singularValues()(0) + amax * chi.gradient_bound(n));
    if (bound >= 1.0) throw DomainError("cutoff motion is not an embedding on its time interval");
    return Motion(std::move(name), n, t0, t1, chi.outer(), pos, vel, jac, {}, guess);
}

inline Motion translation(const Vec& c, const Cutoff& chi, double t0 = -0.5, double t1 = 0.5)
{
    const auto n = c.size();
    return cutoff_linear(
        "translation", chi, Mat::Zero(n, n), c, [](double t) { return t; }, [](double) { return 1.0; }, t0, t1);
}

/// (x_1 + t k x_2, x_2, ...) on the plateau.
inline Motion shear(int n, double k, const Cutoff& chi, double t0 = -0.5, double t1 = 0.5)
{
    Mat a = Mat::Zero(n, n);
    a(0, 1) = k;
    return cutoff_linear(
        "shear", chi, a, Vec::Zero(n), [](double t) { return t; }, [](double) { return 1.0; }, t0, t1);
}

/// (1 + t) x on the plateau.
inline Motion expansion(int n, const Cutoff& chi, double t0 = -0.1, double t1 = 0.1)
{
    return cutoff_linear(
        "expansion", chi, Mat::Identity(n, n), Vec::Zero(n), [](double t) { return t; }, [](double) { return 1.0; }, t0, t1);
}

/// e^t x on the plateau; the Eulerian velocity there is v(y) = y.
inline Motion exponential_scaling(int n, const Cutoff& chi, double t0 = -0.1, double t1 = 0.1)
{
    return cutoff_linear(
        "scaling", chi, Mat::Identity(n, n), Vec::Zero(n), [](double t) { return std::expm1(t); },
        [](double t) { return std::exp(t); }, t0, t1);
}

/// Planar twist kappa_t(x) = c + R(omega t s(|x - c|)) (x - c): a rigid rotation
/// inside radius r0, the identity beyond r1, smooth in between. Circles about c
/// are invariant, so the inverse is the rotation by the opposite angle.
inline Motion twist(const Vec& c, double omega, double r0, double r1, double t0 = -1.0, double t1 = 1.0)
{
    if (c.size() != 2) throw DegreeError("twist motion is planar");
    if (!(0.0 < r0 && r0 < r1)) throw Error("twist radii must satisfy 0 < r0 < r1");
    auto s = [r0, r1](double rho) { return 1.0 - Cutoff::step((rho - r0) / (r1 - r0)); };
    auto ds = [r0, r1](double rho) { return -Cutoff::step_derivative((rho - r0) / (r1 - r0)) / (r1 - r0); };
    auto rot = [](double a) {
        Mat r(2, 2);
        r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        return r;
    };
    Mat j(2, 2);
    j << 0, -1, 1, 0;
    auto pos = [c, omega, s, rot](double t, const Vec& x) -> Vec {
        Vec u = x - c;
        return c + rot(omega * t * s(u.norm())) * u;
    };
    auto vel = [c, omega, s, rot, j](double t, const Vec& x) -> Vec {
        Vec u = x - c;
        double sr = s(u.norm());
        return omega * sr * (j * rot(omega * t * sr) * u);
    };
    auto jac = [c, omega, s, ds, rot, j](double t, const Vec& x) -> Mat {
        Vec u = x - c;
        double rho = u.norm();
        Mat r = rot(omega * t * s(rho));
        Mat out = r;
        if (rho > 0.0) {
            Vec grad = omega * t * ds(rho) * u / rho;
            out += (j * r * u) * grad.transpose();
        }
        return out;
    };
    auto inv = [c, omega, s, rot](double t, const Vec& y) -> Vec {
        Vec u = y - c;
        return c + rot(-omega * t * s(u.norm())) * u;
    };
    return Motion("twist", 2, t0, t1, Box(c.array() - r1, c.array() + r1), pos, vel, jac, inv);
}

/// Piecewise-linear tent motion x + t a h(x) d with the pyramid
/// h = max(0, 1 - |x - c|_inf / w). Only Lipschitz in space.
inline Motion tent(const Vec& c, double w, double a, const Vec& d, double t0 = 0.0, double t1 = 0.5)
{
    const auto n = c.size();
    LipMap base = tent_map(c, w, 1.0, d);
    auto bump = [base, d](const Vec& x) {
        // h(x) recovered from the unit-amplitude tent map.
        Vec diff = base(x) - x;
        return diff.dot(d) / d.squaredNorm();
    };
    auto pos = [a, d, bump](double t, const Vec& x) -> Vec { return x + t * a * bump(x) * d; };
    auto vel = [a, d, bump](double, const Vec& x) -> Vec { return a * bump(x) * d; };
    auto jac = [base, a, n](double t, const Vec& x) -> Mat {
        Mat jb = base.jacobian(x) - Mat::Identity(n, n); // d grad(h)^T
        return Mat::Identity(n, n) + t * a * jb;
    };
    // Lipschitz constant of t a h d is |t a| |d| / w (in the inf-norm gradient).
    if (std::max(std::abs(t0), std::abs(t1)) * std::abs(a) * d.norm() / w >= 1.0)
        throw DomainError("tent motion is not an embedding on its time interval");
    auto guess = [](double, const Vec& y) { return y; };
    Motion m("tent", static_cast<int>(n), t0, t1, Box(c.array() - w, c.array() + w), pos, vel, jac, {}, guess);
    m.set_smooth(false);
    // The pyramid is affine off the faces |x_i - c_i| = w and the diagonals
    // |x_i - c_i| = |x_j - c_j|.
    std::vector<Hyperplane> kinks;
    for (Eigen::Index i = 0; i < n; ++i) {
        Vec e = Vec::Unit(n, i);
        kinks.push_back({e, c[i] - w});
        kinks.push_back({e, c[i] + w});
        for (Eigen::Index j = i + 1; j < n; ++j) {
            Vec ej = Vec::Unit(n, j);
            kinks.push_back({e - ej, c[i] - c[j]});
            kinks.push_back({e + ej, c[i] + c[j]});
        }
    }
    m.set_kinks(std::move(kinks));
    return m;
}

} // namespace motions

} // namespace currentkit

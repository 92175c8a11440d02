#pragma once

// Dense two-phase primal simplex. Entering columns follow Dantzig's rule and
// fall back to Bland's rule after a run of degenerate pivots, which rules out
// cycling. Problems here are small (a few thousand columns at most).

#include "core.hpp"

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace currentkit {

enum class LPStatus { Optimal, Infeasible, Unbounded, IterationLimit, NumericalFailure };

inline const char* to_string(LPStatus s)
{
    switch (s) {
    case LPStatus::Optimal: return "optimal";
    case LPStatus::Infeasible: return "infeasible";
    case LPStatus::Unbounded: return "unbounded";
    case LPStatus::IterationLimit: return "iteration_limit";
    case LPStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

/// minimize c.x  subject to  A_eq x = b_eq,  A_ub x <= b_ub,  lower <= x <= upper.
/// Empty bound vectors mean x >= 0 with no upper bound.
struct LPProblem {
    Vec cost;
    Mat a_eq;
    Vec b_eq;
    Mat a_ub;
    Vec b_ub;
    Vec lower;
    Vec upper;

    int num_vars() const { return static_cast<int>(cost.size()); }
};

struct LPSolution {
    LPStatus status = LPStatus::NumericalFailure;
    double objective = 0.0;
    Vec x;
    int iterations = 0;
    double residual = 0.0;
};

struct LPOptions {
    int max_iterations = 200000;
    double pivot_tolerance = 1e-9;
    double feasibility_tolerance = 1e-8;
    int degenerate_switch = 50;
};

namespace detail {

class Tableau {
public:
    Tableau(Mat t, std::vector<int> basis) : t_(std::move(t)), basis_(std::move(basis)) {}

    Mat& data() { return t_; }
    std::vector<int>& basis() { return basis_; }
    Eigen::Index rows() const { return t_.rows() - 1; }
    Eigen::Index rhs_col() const { return t_.cols() - 1; }

    void pivot(Eigen::Index row, Eigen::Index col)
    {
        t_.row(row) /= t_(row, col);
        for (Eigen::Index i = 0; i < t_.rows(); ++i) {
            if (i == row) continue;
            double f = t_(i, col);
            if (f != 0.0) t_.row(i) -= f * t_.row(row);
        }
        basis_[static_cast<std::size_t>(row)] = static_cast<int>(col);
    }

    /// Runs simplex iterations on columns [0, allowed). The last row holds
    /// reduced costs; the objective value is -t(last, rhs).
    LPStatus run(Eigen::Index allowed, const LPOptions& opt, int& iterations)
    {
        const Eigen::Index obj = t_.rows() - 1;
        int degenerate_run = 0;
        while (true) {
            if (iterations >= opt.max_iterations) return LPStatus::IterationLimit;
            const bool bland = degenerate_run >= opt.degenerate_switch;
            Eigen::Index enter = -1;
            double best = -opt.pivot_tolerance;
            for (Eigen::Index j = 0; j < allowed; ++j) {
                double rc = t_(obj, j);
                if (rc < best) {
                    enter = j;
                    if (bland) break;
                    best = rc;
                }
            }
            if (enter < 0) return LPStatus::Optimal;
            Eigen::Index leave = -1;
            double ratio = kInf;
            for (Eigen::Index i = 0; i < obj; ++i) {
                double a = t_(i, enter);
                if (a <= opt.pivot_tolerance) continue;
                double q = t_(i, rhs_col()) / a;
                if (q < ratio - 1e-12 ||
                    (q <= ratio + 1e-12 && leave >= 0 && basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
                    ratio = std::min(q, ratio);
                    leave = i;
                }
            }
            if (leave < 0) return LPStatus::Unbounded;
            degenerate_run = (ratio <= 1e-12) ? degenerate_run + 1 : 0;
            pivot(leave, enter);
            ++iterations;
        }
    }

private:
    Mat t_;
    std::vector<int> basis_;
};

struct StandardForm {
    // x_orig[j] = offset[j] + sum_k coeff * x_std[col]
    std::vector<std::vector<std::pair<int, double>>> map;
    Vec offset;
    int num_std = 0;
};

} // namespace detail

inline LPSolution lp_solve(const LPProblem& p, const LPOptions& opt = {})
{
    const int nv = p.num_vars();
    const Vec lower = p.lower.size() ? p.lower : Vec::Zero(nv);
    const Vec upper = p.upper.size() ? p.upper : Vec::Constant(nv, kInf);
    const Eigen::Index meq = p.a_eq.rows(), mub = p.a_ub.rows();
    if ((meq && p.a_eq.cols() != nv) || (mub && p.a_ub.cols() != nv) || p.b_eq.size() != meq || p.b_ub.size() != mub ||
        lower.size() != nv || upper.size() != nv)
        throw Error("lp_solve: inconsistent problem dimensions");
    if (!p.cost.allFinite() || !p.a_eq.allFinite() || !p.b_eq.allFinite() || !p.a_ub.allFinite() || !p.b_ub.allFinite())
        throw Error("lp_solve: non-finite problem data");

    // Map every variable onto nonnegative standard variables.
    detail::StandardForm sf;
    sf.map.resize(static_cast<std::size_t>(nv));
    sf.offset = Vec::Zero(nv);
    std::vector<std::pair<int, double>> extra_upper; // (std col, bound)
    for (int j = 0; j < nv; ++j) {
        const double l = lower[j], u = upper[j];
        if (l > u) {
            LPSolution s;
            s.status = LPStatus::Infeasible;
            return s;
        }
        if (std::isfinite(l)) {
            sf.offset[j] = l;
            sf.map[static_cast<std::size_t>(j)] = {{sf.num_std, 1.0}};
            if (std::isfinite(u)) extra_upper.emplace_back(sf.num_std, u - l);
            ++sf.num_std;
        } else if (std::isfinite(u)) {
            sf.offset[j] = u;
            sf.map[static_cast<std::size_t>(j)] = {{sf.num_std++, -1.0}};
        } else {
            sf.map[static_cast<std::size_t>(j)] = {{sf.num_std, 1.0}, {sf.num_std + 1, -1.0}};
            sf.num_std += 2;
        }
    }
    const Eigen::Index nslack = mub + static_cast<Eigen::Index>(extra_upper.size());
    const Eigen::Index m = meq + nslack;
    const Eigen::Index ncols = sf.num_std + nslack; // structural + slack
    Mat a = Mat::Zero(m, ncols);
    Vec b(m);
    Vec c = Vec::Zero(ncols);
    for (int j = 0; j < nv; ++j) {
        for (auto [col, k] : sf.map[static_cast<std::size_t>(j)]) c[col] += p.cost[j] * k;
    }
    auto fill_row = [&](Eigen::Index row, const Mat& src, Eigen::Index srow, double rhs) {
        double shift = 0.0;
        for (int j = 0; j < nv; ++j) {
            double aij = src(srow, j);
            if (aij == 0.0) continue;
            shift += aij * sf.offset[j];
            for (auto [col, k] : sf.map[static_cast<std::size_t>(j)]) a(row, col) += aij * k;
        }
        b[row] = rhs - shift;
    };
    for (Eigen::Index i = 0; i < meq; ++i) fill_row(i, p.a_eq, i, p.b_eq[i]);
    for (Eigen::Index i = 0; i < mub; ++i) {
        fill_row(meq + i, p.a_ub, i, p.b_ub[i]);
        a(meq + i, sf.num_std + i) = 1.0;
    }
    for (std::size_t k = 0; k < extra_upper.size(); ++k) {
        Eigen::Index row = meq + mub + static_cast<Eigen::Index>(k);
        a(row, extra_upper[k].first) = 1.0;
        a(row, sf.num_std + mub + static_cast<Eigen::Index>(k)) = 1.0;
        b[row] = extra_upper[k].second;
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        if (b[i] < 0.0) {
            a.row(i) *= -1.0;
            b[i] = -b[i];
        }
    }

    // Phase 1 tableau: [A | I | b] with reduced costs of sum(artificials).
    Mat t = Mat::Zero(m + 1, ncols + m + 1);
    t.topLeftCorner(m, ncols) = a;
    t.block(0, ncols, m, m).setIdentity();
    t.block(0, ncols + m, m, 1) = b;
    for (Eigen::Index i = 0; i < m; ++i) t.row(m) -= t.row(i);
    for (Eigen::Index i = 0; i < m; ++i) t(m, ncols + i) = 0.0;
    std::vector<int> basis(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = static_cast<int>(ncols + i);
    detail::Tableau tab(std::move(t), std::move(basis));

    LPSolution sol;
    LPStatus st = tab.run(ncols, opt, sol.iterations);
    if (st == LPStatus::IterationLimit) {
        sol.status = st;
        return sol;
    }
    const double scale = 1.0 + (b.size() ? b.cwiseAbs().maxCoeff() : 0.0);
    if (-tab.data()(m, ncols + m) > opt.feasibility_tolerance * scale) {
        sol.status = LPStatus::Infeasible;
        return sol;
    }
    // Drive zero-level artificials out of the basis; rows with no structural
    // entry are redundant and keep their artificial at zero.
    for (Eigen::Index i = 0; i < m; ++i) {
        if (tab.basis()[static_cast<std::size_t>(i)] < ncols) continue;
        Eigen::Index best = -1;
        double bestv = opt.pivot_tolerance;
        for (Eigen::Index j = 0; j < ncols; ++j) {
            if (std::abs(tab.data()(i, j)) > bestv) {
                bestv = std::abs(tab.data()(i, j));
                best = j;
            }
        }
        if (best >= 0) tab.pivot(i, best);
    }

    // Phase 2 reduced costs.
    Mat& td = tab.data();
    td.row(m).setZero();
    td.block(m, 0, 1, ncols) = c.transpose();
    for (Eigen::Index i = 0; i < m; ++i) {
        int bcol = tab.basis()[static_cast<std::size_t>(i)];
        if (bcol < ncols && c[bcol] != 0.0) td.row(m) -= c[bcol] * td.row(i);
    }
    for (Eigen::Index i = 0; i < m; ++i) td(m, ncols + i) = 0.0;
    st = tab.run(ncols, opt, sol.iterations);
    if (st != LPStatus::Optimal) {
        sol.status = st;
        return sol;
    }

    Vec xs = Vec::Zero(ncols);
    for (Eigen::Index i = 0; i < m; ++i) {
        int bcol = tab.basis()[static_cast<std::size_t>(i)];
        if (bcol < ncols) xs[bcol] = td(i, ncols + m);
    }
    sol.x = sf.offset;
    for (int j = 0; j < nv; ++j)
        for (auto [col, k] : sf.map[static_cast<std::size_t>(j)]) sol.x[j] += k * xs[col];
    sol.objective = p.cost.dot(sol.x);

    double res = 0.0;
    if (meq) res = std::max(res, (p.a_eq * sol.x - p.b_eq).cwiseAbs().maxCoeff());
    if (mub) res = std::max(res, (p.a_ub * sol.x - p.b_ub).maxCoeff());
    for (int j = 0; j < nv; ++j) res = std::max({res, lower[j] - sol.x[j], sol.x[j] - upper[j]});
    sol.residual = res;
    sol.status = (res <= opt.feasibility_tolerance && std::isfinite(sol.objective)) ? LPStatus::Optimal : LPStatus::NumericalFailure;
    return sol;
}

/// Writes the problem in CPLEX LP text format for cross-checking with external solvers.
inline void write_lp(std::ostream& os, const LPProblem& p)
{
    const int nv = p.num_vars();
    auto term = [&](double v, int j, bool first) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s%.17g x%d", first ? (v < 0 ? "-" : "") : (v < 0 ? " - " : " + "), std::abs(v), j + 1);
        os << buf;
    };
    auto row = [&](const Mat& a, Eigen::Index i) {
        bool first = true;
        for (int j = 0; j < nv; ++j) {
            if (a(i, j) == 0.0) continue;
            term(a(i, j), j, first);
            first = false;
        }
        if (first) os << "0 x1";
    };
    char buf[64];
    os << "\\ currentkit linear program\nMinimize\n obj: ";
    bool first = true;
    for (int j = 0; j < nv; ++j) {
        if (p.cost[j] == 0.0) continue;
        term(p.cost[j], j, first);
        first = false;
    }
    if (first) os << "0 x1";
    os << "\nSubject To\n";
    for (Eigen::Index i = 0; i < p.a_eq.rows(); ++i) {
        os << " e" << i + 1 << ": ";
        row(p.a_eq, i);
        std::snprintf(buf, sizeof buf, " = %.17g\n", p.b_eq[i]);
        os << buf;
    }
    for (Eigen::Index i = 0; i < p.a_ub.rows(); ++i) {
        os << " u" << i + 1 << ": ";
        row(p.a_ub, i);
        std::snprintf(buf, sizeof buf, " <= %.17g\n", p.b_ub[i]);
        os << buf;
    }
    os << "Bounds\n";
    for (int j = 0; j < nv; ++j) {
        double l = p.lower.size() ? p.lower[j] : 0.0;
        double u = p.upper.size() ? p.upper[j] : kInf;
        if (!std::isfinite(l) && !std::isfinite(u)) {
            os << " x" << j + 1 << " free\n";
            continue;
        }
        os << ' ';
        if (std::isfinite(l)) {
            std::snprintf(buf, sizeof buf, "%.17g <= ", l);
            os << buf;
        } else {
            os << "-inf <= ";
        }
        os << 'x' << j + 1;
        if (std::isfinite(u)) {
            std::snprintf(buf, sizeof buf, " <= %.17g", u);
            os << buf;
        }
        os << '\n';
    }
    os << "End\n";
}

} // namespace currentkit

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace currentkit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Largest ambient dimension supported by the dense exterior algebra. Interval
/// products add one time axis, so user-facing chains and forms live in n <= 7.
inline constexpr int kMaxAmbient = 8;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Degree mismatch or overflow (p + q > n, contraction of a 0-form, ...).
class DegreeError : public Error {
public:
    using Error::Error;
};

/// A point left the domain on which a form or map is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Solver, inversion or integrator failure.
class NumericalError : public Error {
public:
    using Error::Error;
};

inline std::size_t binomial(int n, int k)
{
    if (k < 0 || k > n) return 0;
    std::size_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
    return r;
}

inline double factorial(int n)
{
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool all_finite(const Vec& v)
{
    return v.allFinite();
}

} // namespace currentkit

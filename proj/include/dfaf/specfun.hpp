#ifndef DFAF_SPECFUN_HPP
#define DFAF_SPECFUN_HPP

///
/// \file specfun.hpp
///
/// Real special functions used by the outage formulas: log-gamma, the
/// regularized incomplete gamma pair P(a,x)/Q(a,x), and the modified Bessel
/// function of the second kind for integer order.
///

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <string>

#include "dfaf/errors.hpp"

namespace dfaf::specfun {

inline double ln_gamma(double a)
{
    if (!(a > 0.0)) {
        throw domain_error("ln_gamma: argument must be positive, got " + std::to_string(a));
    }
    return std::lgamma(a);
}

namespace detail {

constexpr int kMaxIter = 10000;
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = std::numeric_limits<double>::min() / kEps;

inline void check_gamma_args(const char* who, double a, double x)
{
    if (!(a > 0.0)) {
        throw domain_error(std::string(who) + ": shape must be positive");
    }
    if (!(x >= 0.0)) {
        throw domain_error(std::string(who) + ": argument must be nonnegative");
    }
}

// x^a e^{-x} / Gamma(a), evaluated in log space.
inline double gamma_prefactor(double a, double x)
{
    return std::exp(a * std::log(x) - x - std::lgamma(a));
}

// P(a,x) by the power series; converges quickly for x < a + 1.
inline double lower_series(double a, double x)
{
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 0; n < kMaxIter; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) {
            return sum * gamma_prefactor(a, x);
        }
    }
    throw convergence_error("incomplete gamma series did not converge");
}

// Q(a,x) by the Legendre continued fraction (modified Lentz); for x >= a + 1.
inline double upper_continued_fraction(double a, double x)
{
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) {
            return gamma_prefactor(a, x) * h;
        }
    }
    throw convergence_error("incomplete gamma continued fraction did not converge");
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a,x) = gamma(a,x)/Gamma(a).
///
/// Computed directly (not as 1 - Q) whenever x < a + 1, so small
/// probabilities keep full relative precision.
inline double reg_lower_gamma(double a, double x)
{
    detail::check_gamma_args("reg_lower_gamma", a, x);
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return detail::lower_series(a, x);
    return 1.0 - detail::upper_continued_fraction(a, x);
}

/// Regularized upper incomplete gamma Q(a,x) = Gamma(a,x)/Gamma(a).
inline double reg_upper_gamma(double a, double x)
{
    detail::check_gamma_args("reg_upper_gamma", a, x);
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - detail::lower_series(a, x);
    return detail::upper_continued_fraction(a, x);
}

/// Leading small-x behaviour of P(a,x): x^a / (a Gamma(a)).
inline double reg_lower_gamma_small_x(double a, double x)
{
    detail::check_gamma_args("reg_lower_gamma_small_x", a, x);
    if (x == 0.0) return 0.0;
    return std::exp(a * std::log(x) - std::log(a) - std::lgamma(a));
}

namespace detail {

// K0 and K1 together; power series for x <= 2, Steed's continued fraction
// (Temme's CF2 at order 0) beyond.
struct BesselK01 {
    double k0;
    double k1;
};

inline BesselK01 bessel_k01_series(double x)
{
    constexpr double euler = std::numbers::egamma;
    const double y = 0.25 * x * x;
    const double lnhalf = std::log(0.5 * x);

    // K0 = -(ln(x/2) + euler) I0 + sum_{k>=1} H_k y^k / (k!)^2
    // K1 = 1/x + ln(x/2) I1 - (x/4) sum_{k>=0} (psi(k+1) + psi(k+2)) y^k / (k!(k+1)!)
    double t0 = 1.0;        // y^k / (k!)^2
    double t1 = 1.0;        // y^k / (k!(k+1)!)
    double harmonic = 0.0;  // H_k
    double i0 = 1.0;
    double s0 = 0.0;
    double i1 = 1.0;
    double s1 = -2.0 * euler + 1.0;  // psi(1) + psi(2)
    for (int k = 1; k < kMaxIter; ++k) {
        t0 *= y / (static_cast<double>(k) * k);
        t1 *= y / (static_cast<double>(k) * (k + 1));
        harmonic += 1.0 / k;
        i0 += t0;
        s0 += harmonic * t0;
        i1 += t1;
        const double psi_sum = -2.0 * euler + 2.0 * harmonic + 1.0 / (k + 1);
        s1 += psi_sum * t1;
        if (t0 < kEps * i0 && t1 < kEps * i1) break;
    }
    i1 *= 0.5 * x;
    return {-(lnhalf + euler) * i0 + s0, 1.0 / x + lnhalf * i1 - 0.25 * x * s1};
}

inline BesselK01 bessel_k01_cf(double x)
{
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    int i = 2;
    for (; i < kMaxIter; ++i) {
        a -= 2.0 * (i - 1);
        c = -a * c / i;
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < kEps) break;
    }
    if (i == kMaxIter) throw convergence_error("bessel_k: continued fraction did not converge");
    h *= a1;
    const double k0 = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) / s;
    const double k1 = k0 * (x + 0.5 - h) / x;
    return {k0, k1};
}

}  // namespace detail

/// Modified Bessel function of the second kind K_n(x) for integer n.
/// Uses K_{-n} = K_n and upward recurrence from K0/K1.
inline double bessel_k_int(int n, double x)
{
    if (!(x > 0.0)) {
        throw domain_error("bessel_k_int: argument must be positive");
    }
    const int order = std::abs(n);
    const auto k01 = x <= 2.0 ? detail::bessel_k01_series(x) : detail::bessel_k01_cf(x);
    if (order == 0) return k01.k0;
    if (order == 1) return k01.k1;
    double km = k01.k0;
    double k = k01.k1;
    for (int j = 1; j < order; ++j) {
        const double kp = km + (2.0 * j / x) * k;
        km = k;
        k = kp;
    }
    return k;
}

}  // namespace dfaf::specfun

#endif  // DFAF_SPECFUN_HPP

#pragma once

// Exact polynomials in the particle number N and subspace dimension n with
// arbitrary-precision rational coefficients.

#include <boost/multiprecision/cpp_int.hpp>

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace twomode {

using Rational = boost::multiprecision::cpp_rational;

class BivariatePoly {
public:
    using Key = std::pair<int, int>;  // (power of N, power of n)

    BivariatePoly() = default;
    BivariatePoly(Rational constant);  // NOLINT(google-explicit-constructor)

    static BivariatePoly monomial(Rational coeff, int power_N, int power_n);
    static BivariatePoly var_N() { return monomial(1, 1, 0); }
    static BivariatePoly var_n() { return monomial(1, 0, 1); }

    const std::map<Key, Rational>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int degree_N() const;
    int degree_n() const;
    int total_degree() const;

    Rational coefficient(int power_N, int power_n) const;
    Rational evaluate(const Rational& N, const Rational& n) const;
    double evaluate(double N, double n) const;

    BivariatePoly& operator+=(const BivariatePoly& rhs);
    BivariatePoly& operator-=(const BivariatePoly& rhs);
    BivariatePoly& operator*=(const Rational& factor);
    friend BivariatePoly operator+(BivariatePoly lhs, const BivariatePoly& rhs) { return lhs += rhs; }
    friend BivariatePoly operator-(BivariatePoly lhs, const BivariatePoly& rhs) { return lhs -= rhs; }
    friend BivariatePoly operator*(const BivariatePoly& lhs, const BivariatePoly& rhs);
    friend BivariatePoly operator*(BivariatePoly lhs, const Rational& rhs) { return lhs *= rhs; }
    bool operator==(const BivariatePoly& rhs) const { return terms_ == rhs.terms_; }

    /// Divides by n; throws if any term carries no factor of n.
    BivariatePoly divide_by_n() const;
    BivariatePoly pow(int exponent) const;

    /// Human-readable form, highest total degree first, e.g. "1/4*N^2 - 1/12*n^2 + 1/12".
    std::string to_string() const;
    /// {"terms": [[p, q, "num/den"], ...]}
    nlohmann::json to_json() const;
    static BivariatePoly from_json(const nlohmann::json& doc);

private:
    void add_term(const Key& key, const Rational& value);
    std::map<Key, Rational> terms_;
};

std::string rational_to_string(const Rational& value);
Rational rational_from_string(const std::string& text);

/// Sum of l^j over l = -(n-1)/2 .. (n-1)/2 for odd n, as a polynomial in n.
BivariatePoly power_sum(int j);

/// (1/n) sum_{|l| < n/2} prod_{A<m} (N/2 + l - A) prod_{B<k-m} (N/2 - l - B):
/// the ensemble average of the falling-factorial moment with m particles in
/// mode a and k - m in mode b. Requires 0 <= m <= k <= 6.
BivariatePoly moment_sum(int k, int m);

/// Exact coefficient of N^p n^q.
inline Rational coefficient(const BivariatePoly& poly, int p, int q) { return poly.coefficient(p, q); }

}  // namespace twomode

#include "twomode/poly.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace twomode {

BivariatePoly::BivariatePoly(Rational constant) { add_term({0, 0}, constant); }

BivariatePoly BivariatePoly::monomial(Rational coeff, int power_N, int power_n)
{
    if (power_N < 0 || power_n < 0) throw std::invalid_argument("negative polynomial power");
    BivariatePoly out;
    out.add_term({power_N, power_n}, coeff);
    return out;
}

void BivariatePoly::add_term(const Key& key, const Rational& value)
{
    if (value == 0) return;
    auto [it, inserted] = terms_.try_emplace(key, value);
    if (!inserted) {
        it->second += value;
        if (it->second == 0) terms_.erase(it);
    }
}

int BivariatePoly::degree_N() const
{
    int d = 0;
    for (const auto& [k, v] : terms_) d = std::max(d, k.first);
    return d;
}

int BivariatePoly::degree_n() const
{
    int d = 0;
    for (const auto& [k, v] : terms_) d = std::max(d, k.second);
    return d;
}

int BivariatePoly::total_degree() const
{
    int d = 0;
    for (const auto& [k, v] : terms_) d = std::max(d, k.first + k.second);
    return d;
}

Rational BivariatePoly::coefficient(int power_N, int power_n) const
{
    auto it = terms_.find({power_N, power_n});
    return it == terms_.end() ? Rational(0) : it->second;
}

Rational BivariatePoly::evaluate(const Rational& N, const Rational& n) const
{
    Rational acc = 0;
    for (const auto& [k, v] : terms_) {
        Rational term = v;
        for (int i = 0; i < k.first; ++i) term *= N;
        for (int i = 0; i < k.second; ++i) term *= n;
        acc += term;
    }
    return acc;
}

double BivariatePoly::evaluate(double N, double n) const
{
    double acc = 0.0;
    for (const auto& [k, v] : terms_) {
        double term = static_cast<double>(v);
        for (int i = 0; i < k.first; ++i) term *= N;
        for (int i = 0; i < k.second; ++i) term *= n;
        acc += term;
    }
    return acc;
}

BivariatePoly& BivariatePoly::operator+=(const BivariatePoly& rhs)
{
    for (const auto& [k, v] : rhs.terms_) add_term(k, v);
    return *this;
}

BivariatePoly& BivariatePoly::operator-=(const BivariatePoly& rhs)
{
    for (const auto& [k, v] : rhs.terms_) add_term(k, -v);
    return *this;
}

BivariatePoly& BivariatePoly::operator*=(const Rational& factor)
{
    if (factor == 0) {
        terms_.clear();
        return *this;
    }
    for (auto& [k, v] : terms_) v *= factor;
    return *this;
}

BivariatePoly operator*(const BivariatePoly& lhs, const BivariatePoly& rhs)
{
    BivariatePoly out;
    for (const auto& [ka, va] : lhs.terms_)
        for (const auto& [kb, vb] : rhs.terms_)
            out.add_term({ka.first + kb.first, ka.second + kb.second}, va * vb);
    return out;
}

BivariatePoly BivariatePoly::divide_by_n() const
{
    BivariatePoly out;
    for (const auto& [k, v] : terms_) {
        if (k.second == 0) throw std::domain_error("polynomial is not divisible by n");
        out.add_term({k.first, k.second - 1}, v);
    }
    return out;
}

BivariatePoly BivariatePoly::pow(int exponent) const
{
    BivariatePoly out(1);
    for (int i = 0; i < exponent; ++i) out = out * *this;
    return out;
}

std::string rational_to_string(const Rational& value)
{
    std::ostringstream os;
    os << numerator(value);
    if (denominator(value) != 1) os << '/' << denominator(value);
    return os.str();
}

Rational rational_from_string(const std::string& text)
{
    using boost::multiprecision::cpp_int;
    const auto slash = text.find('/');
    try {
        if (slash == std::string::npos) return Rational(cpp_int(text));
        return Rational(cpp_int(text.substr(0, slash)), cpp_int(text.substr(slash + 1)));
    } catch (const std::exception&) {
        throw std::invalid_argument("malformed rational '" + text + "'");
    }
}

std::string BivariatePoly::to_string() const
{
    if (terms_.empty()) return "0";
    std::vector<std::pair<Key, Rational>> ordered(terms_.begin(), terms_.end());
    std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        const int da = a.first.first + a.first.second;
        const int db = b.first.first + b.first.second;
        if (da != db) return da > db;
        return a.first.first > b.first.first;
    });
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, v] : ordered) {
        Rational mag = v < 0 ? Rational(-v) : v;
        if (first)
            os << (v < 0 ? "-" : "");
        else
            os << (v < 0 ? " - " : " + ");
        first = false;
        const bool bare = k.first == 0 && k.second == 0;
        if (mag != 1 || bare) os << rational_to_string(mag);
        bool need_star = mag != 1;
        auto factor = [&](const char* sym, int power) {
            if (power == 0) return;
            if (need_star) os << '*';
            os << sym;
            if (power > 1) os << '^' << power;
            need_star = true;
        };
        factor("N", k.first);
        factor("n", k.second);
    }
    return os.str();
}

nlohmann::json BivariatePoly::to_json() const
{
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [k, v] : terms_) terms.push_back({k.first, k.second, rational_to_string(v)});
    return {{"terms", terms}};
}

BivariatePoly BivariatePoly::from_json(const nlohmann::json& doc)
{
    BivariatePoly out;
    for (const auto& t : doc.at("terms"))
        out.add_term({t.at(0).get<int>(), t.at(1).get<int>()}, rational_from_string(t.at(2).get<std::string>()));
    return out;
}

// ---------------------------------------------------------------------------

namespace {

Rational binomial(int n, int k)
{
    Rational out = 1;
    for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
    return out;
}

// B_0..B_j with the B_1 = +1/2 convention.
std::vector<Rational> bernoulli_plus(int j)
{
    std::vector<Rational> b(j + 1);
    b[0] = 1;
    for (int m = 1; m <= j; ++m) {
        Rational acc = 0;
        for (int i = 0; i < m; ++i) acc += binomial(m + 1, i) * b[i];
        b[m] = -acc / (m + 1);
    }
    if (j >= 1) b[1] = Rational(1, 2);
    return b;
}

using LPoly = std::vector<BivariatePoly>;  // polynomial in l with (N, n) coefficients

LPoly multiply(const LPoly& x, const LPoly& y)
{
    LPoly out(x.size() + y.size() - 1);
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j) out[i + j] += x[i] * y[j];
    return out;
}

}  // namespace

BivariatePoly power_sum(int j)
{
    if (j < 0) throw std::invalid_argument("power_sum requires j >= 0");
    if (j == 0) return BivariatePoly::var_n();
    if (j % 2 == 1) return {};
    // sum_{l=1}^{h} l^j = 1/(j+1) sum_i C(j+1, i) B_i h^{j+1-i}, then h = (n - 1)/2
    const auto b = bernoulli_plus(j);
    const BivariatePoly h = (BivariatePoly::var_n() - BivariatePoly(1)) * Rational(1, 2);
    BivariatePoly half_sum;
    for (int i = 0; i <= j; ++i) half_sum += h.pow(j + 1 - i) * (binomial(j + 1, i) * b[i] / (j + 1));
    return half_sum * Rational(2);
}

BivariatePoly moment_sum(int k, int m)
{
    if (k < 0 || k > 6 || m < 0 || m > k)
        throw std::invalid_argument("moment_sum requires 0 <= m <= k <= 6, got k = " + std::to_string(k) +
                                    ", m = " + std::to_string(m));
    const BivariatePoly half_N = BivariatePoly::var_N() * Rational(1, 2);
    LPoly product{BivariatePoly(1)};
    for (int a = 0; a < m; ++a) product = multiply(product, {half_N - BivariatePoly(a), BivariatePoly(1)});
    for (int b = 0; b < k - m; ++b) product = multiply(product, {half_N - BivariatePoly(b), BivariatePoly(-1)});
    BivariatePoly total;
    for (std::size_t j = 0; j < product.size(); ++j) total += product[j] * power_sum(static_cast<int>(j));
    return total.divide_by_n();
}

}  // namespace twomode

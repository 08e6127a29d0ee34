#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "twomode/modes.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>

using namespace twomode;

namespace {

constexpr double kPi = std::numbers::pi;

// psi_a = (e^{2 pi i r} + e^{4 pi i r} + i) / sqrt 3, psi_b = e^{-2 pi i r} sampled on G points.
ModePair asymmetric_modes(std::size_t g = 32)
{
    std::vector<cplx> a(g), b(g);
    for (std::size_t j = 0; j < g; ++j) {
        const double r = static_cast<double>(j) / g;
        a[j] = (std::polar(1.0, 2 * kPi * r) + std::polar(1.0, 4 * kPi * r) + cplx(0, 1)) / std::sqrt(3.0);
        b[j] = std::polar(1.0, -2 * kPi * r);
    }
    return ModePair::tabulated(a, b);
}

// Sum over all k! permutations, from raw mode values.
cplx permutation_oracle(const ModePair& modes, int m, std::vector<double> points)
{
    const int k = static_cast<int>(points.size());
    std::vector<int> perm(k);
    for (int i = 0; i < k; ++i) perm[i] = i;
    cplx total{};
    do {
        cplx prod = 1.0;
        for (int i = 0; i < k; ++i) {
            const ModeValues v = modes(points[perm[i]]);
            prod *= i < m ? v.a : v.b;
        }
        total += prod;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

std::vector<double> random_points(std::mt19937_64& gen, int count, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> out(count);
    for (auto& x : out) x = u(gen);
    return out;
}

}  // namespace

TEST_CASE("plane-wave products")
{
    const ModePair pw = ModePair::plane_wave(1);
    const double k0 = 2 * kPi;
    const double r = 0.37, x = 0.13;
    const double one[] = {r};
    CHECK(std::abs(phi_m(pw, 1, one) - std::polar(1.0, k0 * r)) < 1e-14);
    const double two[] = {r, r + x};
    CHECK(f_m(pw, 1, two) == doctest::Approx(2.0 + 2.0 * std::cos(2 * k0 * x)));
    for (int k = 1; k <= 6; ++k) {
        std::vector<double> pts(k);
        for (int i = 0; i < k; ++i) pts[i] = 0.1 * i + 0.03;
        const cplx raw = phi_m_permutation_sum(pw, 0, pts);
        cplx prod = 1.0;
        for (double p : pts) prod *= pw(p).b;
        CHECK(std::abs(raw - factorial(k) * prod) < 1e-10 * factorial(k));
        CHECK(std::norm(raw) == doctest::Approx(factorial(k) * factorial(k)));
    }
}

TEST_CASE("symmetrized products match the brute-force permutation sum")
{
    std::mt19937_64 gen(21);
    const ModePair variants[] = {ModePair::plane_wave(2), asymmetric_modes(),
                                 ModePair::far_field_gaussian({0.0, 6.0, 1.0, 30.0})};
    for (const auto& modes : variants) {
        const bool line = modes.domain() == Domain::RealLine;
        for (int k = 1; k <= 5; ++k)
            for (int trial = 0; trial < 5; ++trial) {
                const auto pts = random_points(gen, k, line ? -40.0 : 0.0, line ? 40.0 : 1.0);
                for (int m = 0; m <= k; ++m) {
                    const cplx oracle = permutation_oracle(modes, m, pts);
                    const cplx raw = phi_m_permutation_sum(modes, m, pts);
                    const double scale = std::max(1e-300, std::abs(oracle));
                    CHECK(std::abs(raw - oracle) <= 1e-12 * std::max(1.0, scale));
                    const cplx normalized = phi_m(modes, m, pts) * factorial(m) * factorial(k - m);
                    CHECK(std::abs(normalized - oracle) <= 1e-12 * std::max(1.0, scale));
                }
            }
    }
}

TEST_CASE("argument validation")
{
    const ModePair pw = ModePair::plane_wave(1);
    const double pts[] = {0.1, 0.2};
    CHECK_THROWS_AS(phi_m(pw, 3, pts), std::invalid_argument);
    CHECK_THROWS_AS(phi_m(pw, -1, pts), std::invalid_argument);
    const std::vector<double> seven(7, 0.1);
    CHECK_THROWS_AS(phi_m(pw, 0, seven), std::invalid_argument);
    CHECK_THROWS_AS(ModePair::plane_wave(0), std::invalid_argument);
    CHECK_THROWS_AS(far_field(GaussianWavepackets{0, 10, 1}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(far_field(GaussianWavepackets{0, 10, 1}, -2.0), std::invalid_argument);
    std::vector<cplx> a(8, 1.0), b(8, 1.0);
    CHECK_THROWS_AS(ModePair::tabulated(a, b), std::invalid_argument);
}

TEST_CASE("exchange symmetry for equal-modulus modes")
{
    std::mt19937_64 gen(4);
    const ModePair pw = ModePair::plane_wave(1);
    CHECK(pw.equal_modulus());
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 1 + trial % 6;
        const auto pts = random_points(gen, k, 0.0, 1.0);
        for (int m = 0; m <= k; ++m) CHECK(f_m(pw, m, pts) == doctest::Approx(f_m(pw, k - m, pts)).epsilon(1e-10));
    }
}

TEST_CASE("local phase transformations leave F_m unchanged")
{
    const std::size_t g = 32;
    const ModePair base = asymmetric_modes(g);
    const auto& tab = std::get<Tabulated>(base.variant());
    std::mt19937_64 gen(8);
    std::normal_distribution<double> coeff;
    const double c1 = coeff(gen), c2 = coeff(gen), c3 = coeff(gen);
    std::vector<cplx> a(g), b(g);
    for (std::size_t j = 0; j < g; ++j) {
        const double r = static_cast<double>(j) / g;
        const double theta = c1 * std::sin(2 * kPi * r) + c2 * std::cos(4 * kPi * r) + c3;
        a[j] = tab.values_a[j] * std::polar(1.0, theta);
        b[j] = tab.values_b[j] * std::polar(1.0, theta);
    }
    const ModePair rotated = ModePair::tabulated(a, b);
    std::uniform_int_distribution<std::size_t> site(0, g - 1);
    for (int trial = 0; trial < 40; ++trial) {
        const int k = 1 + trial % 4;
        std::vector<double> pts(k);
        for (auto& p : pts) p = static_cast<double>(site(gen)) / g;
        for (int m = 0; m <= k; ++m)
            CHECK(f_m(rotated, m, pts) == doctest::Approx(f_m(base, m, pts)).epsilon(1e-10));
    }
}

TEST_CASE("cluster decomposition holds for every variant")
{
    std::mt19937_64 gen(13);
    const ModePair variants[] = {ModePair::plane_wave(1), asymmetric_modes(),
                                 ModePair::far_field_gaussian({0.0, 10.0, 1.0, 50.0})};
    for (const auto& modes : variants) {
        const bool line = modes.domain() == Domain::RealLine;
        for (int k = 1; k <= 3; ++k)
            for (int trial = 0; trial < 30; ++trial) {
                const auto pts = random_points(gen, 2 * k, line ? -100.0 : 0.0, line ? 100.0 : 1.0);
                for (int M = 0; M <= 2 * k; ++M) {
                    const double scale = std::max(1.0, std::abs(phi_m(modes, M, pts)));
                    CHECK(cluster_decompose_check(modes, M, pts) < 1e-10 * scale);
                }
            }
    }
}

TEST_CASE("tabulated modes round-trip through the text format")
{
    const ModePair modes = asymmetric_modes(16);
    const auto path = std::filesystem::temp_directory_path() / "twomode_modes_roundtrip.txt";
    modes.save_tabulated(path.string());
    const ModePair loaded = ModePair::load_tabulated(path.string());
    std::filesystem::remove(path);
    for (double r : {0.0, 0.1, 0.33, 0.9}) {
        CHECK(std::abs(loaded(r).a - modes(r).a) < 1e-12);
        CHECK(std::abs(loaded(r).b - modes(r).b) < 1e-12);
    }
    CHECK_THROWS(ModePair::load_tabulated("/nonexistent/modes.txt"));
}

TEST_CASE("trigonometric interpolation reproduces band-limited modes")
{
    const ModePair modes = asymmetric_modes(32);
    for (double r : {0.013, 0.5, 0.777}) {
        const cplx a = (std::polar(1.0, 2 * kPi * r) + std::polar(1.0, 4 * kPi * r) + cplx(0, 1)) / std::sqrt(3.0);
        CHECK(std::abs(modes(r).a - a) < 1e-12);
        CHECK(std::abs(modes(r).b - std::polar(1.0, -2 * kPi * r)) < 1e-12);
    }
}

TEST_CASE("far-field packets spread linearly and carry the fringe phase")
{
    auto second_moment = [](double t) {
        double norm = 0.0, m2 = 0.0;
        const double dz = 0.05 * t;
        for (double z = -30 * t; z <= 30 * t; z += dz) {
            const double w = std::norm(gaussian_far_field(z, t, 0.0, 1.0));
            norm += w * dz;
            m2 += z * z * w * dz;
        }
        return std::pair{norm, std::sqrt(m2 / norm)};
    };
    const auto [n50, s50] = second_moment(50.0);
    const auto [n100, s100] = second_moment(100.0);
    CHECK(n50 == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(n100 == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(s100 / s50 == doctest::Approx(2.0).epsilon(1e-6));

    const FarFieldGaussian spec{0.0, 10.0, 1.0, 50.0};
    const ModePair ff = ModePair::far_field_gaussian(spec);
    CHECK(effective_wavenumber(spec) == doctest::Approx(10.0 / 200.0));
    for (double z : {-40.0, -3.0, 7.5, 60.0}) {
        const cplx prod = std::conj(ff(z).a) * ff(z).b;
        CHECK(std::abs(prod / std::abs(prod) - std::polar(1.0, -10.0 * z / 100.0)) < 1e-10);
    }
}

TEST_CASE("far-field form approaches exact free evolution")
{
    // Exact evolution by one split step on a periodic grid (naive DFT), accurate to about 1e-6.
    const double t = 200.0, sigma = 1.0;
    const int M = 8192;
    const double L = 4000.0, dz = L / M;
    std::vector<cplx> psi(M), spec(M), out(M);
    for (int j = 0; j < M; ++j) psi[j] = gaussian_initial(-L / 2 + j * dz, 0.0, sigma);
    std::vector<cplx> twiddle(M);
    for (int j = 0; j < M; ++j) twiddle[j] = std::polar(1.0, -2 * kPi * j / M);
    for (int q = 0; q < M; ++q) {
        cplx acc{};
        for (int j = 0; j < M; ++j) acc += psi[j] * twiddle[(static_cast<long>(q) * j) % M];
        const int qs = q < M / 2 ? q : q - M;
        const double k = 2 * kPi * qs / L;
        spec[q] = acc * std::polar(1.0, -k * k * t);
    }
    for (int j = 0; j < M; ++j) {
        cplx acc{};
        for (int q = 0; q < M; ++q) acc += spec[q] * std::conj(twiddle[(static_cast<long>(q) * j) % M]);
        out[j] = acc / static_cast<double>(M);
    }
    double num = 0.0, den = 0.0, closed = 0.0;
    for (int j = 0; j < M; ++j) {
        const double z = -L / 2 + j * dz;
        const cplx exact = out[j];
        num += std::norm(gaussian_far_field(z, t, 0.0, sigma) - exact) * dz;
        closed += std::norm(gaussian_evolved(z, t, 0.0, sigma) - exact) * dz;
        den += std::norm(exact) * dz;
    }
    CHECK(std::sqrt(closed / den) < 1e-5);
    CHECK(std::sqrt(num / den) < 0.02);
}

TEST_CASE("convolution profile of Gaussian packets")
{
    const ConvolutionProfile p = convolution_profile(GaussianWavepackets{0.0, 10.0, 1.0});
    CHECK(p.peak == doctest::Approx(10.0).epsilon(1e-6));
    CHECK(p.curvature == doctest::Approx(-0.25).epsilon(1e-3));
    CHECK(p.suppression_exponent == doctest::Approx(6.25).epsilon(2e-3));
    CHECK(p.separation_ratio == doctest::Approx(10.0 * 0.25 / (2 * kPi)).epsilon(1e-3));
    CHECK_FALSE(p.separated);

    const ConvolutionProfile wide = convolution_profile(GaussianWavepackets{0.0, 400.0, 1.0});
    CHECK(wide.separated);

    const ConvolutionProfile same = convolution_profile(GaussianWavepackets{0.0, 0.0, 2.0});
    CHECK(std::abs(same.peak) < 1e-9);
    CHECK(same.curvature == doctest::Approx(-1.0 / 16.0).epsilon(1e-3));

    CHECK_THROWS_AS(convolution_profile(ModePair::plane_wave(1)), std::invalid_argument);
}

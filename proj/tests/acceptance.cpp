// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "twomode/correlations.hpp"
#include "twomode/montecarlo.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <mutex>
#include <numbers>
#include <random>

using namespace twomode;
using boost::multiprecision::cpp_int;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<double> random_offsets(std::mt19937_64& gen, int count)
{
    std::uniform_real_distribution<double> u(0.01, 0.99);
    std::vector<double> out;
    while (static_cast<int>(out.size()) < count) {
        const double x = u(gen);
        bool distinct = true;
        for (double y : out) distinct = distinct && std::abs(x - y) > 1e-3;
        if (distinct) out.push_back(x);
    }
    return out;
}

Outcome plane_wave_vanishing()
{
    std::mt19937_64 gen(1001);
    double worst_off = 0.0, worst_d = 0.0;
    for (int k = 2; k <= 3; ++k)
        for (int trial = 0; trial < 20; ++trial) {
            const ITable t = integral_table_quadrature(KernelSpec::delta_comb(random_offsets(gen, k - 1)),
                                                       ModePair::plane_wave(1));
            worst_off = std::max(worst_off, t.max_off_diagonal());
            worst_d = std::max(worst_d, std::abs(coefficient_D_2k0(t)) / t.diagonal_scale());
        }
    return {worst_off < 1e-10 && worst_d < 1e-10,
            fmt("max |I_mm'| off-diagonal %.2e, max |D_2k0|/scale %.2e", worst_off, worst_d)};
}

Outcome subleading_cancellation()
{
    std::mt19937_64 gen(1002);
    double worst = 0.0;
    for (int k = 2; k <= 3; ++k)
        for (int trial = 0; trial < 20; ++trial) {
            const ITable t = integral_table_quadrature(KernelSpec::delta_comb(random_offsets(gen, k - 1)),
                                                       ModePair::plane_wave(1));
            worst = std::max(worst, std::abs(coefficient_D_2k2(t)) / t.diagonal_scale());
        }
    bool exact = true;
    for (int trial = 0; trial < 5; ++trial) {
        const BivariatePoly p = variance_polynomial(
            integral_table(KernelSpec::delta_comb(random_offsets(gen, 1)), ModePair::plane_wave(1)));
        exact = exact && coefficient(p, 4, 0) == 0 && coefficient(p, 2, 2) == 0 && coefficient(p, 0, 4) != 0;
    }
    return {worst < 1e-10 && exact,
            fmt("max |D_2k-2,2|/scale %.2e; k=2 polynomial (4,0)=(2,2)=0, (0,4)!=0: %s", worst, exact ? "yes" : "no")};
}

Outcome moment_exactness()
{
    long checked = 0, mismatched = 0;
    for (int k = 0; k <= 4; ++k)
        for (int m = 0; m <= k; ++m) {
            const BivariatePoly p = moment_sum(k, m);
            for (long N = 2; N <= 20; N += 2)
                for (long n = 1; n <= N + 1; n += 2) {
                    cpp_int total = 0;
                    for (long l = -(n - 1) / 2; l <= (n - 1) / 2; ++l) {
                        cpp_int prod = 1;
                        for (int a = 0; a < m; ++a) prod *= N / 2 + l - a;
                        for (int b = 0; b < k - m; ++b) prod *= N / 2 - l - b;
                        total += prod;
                    }
                    ++checked;
                    if (p.evaluate(Rational(N), Rational(n)) != Rational(total, cpp_int(n))) ++mismatched;
                }
        }
    return {mismatched == 0, fmt("%ld (k, m, N, n) points, %ld mismatches", checked, mismatched)};
}

Outcome expansion_coefficients()
{
    int bad = 0, checked = 0;
    for (int k = 0; k <= 4; ++k)
        for (int m = 0; m <= k; ++m) {
            const BivariatePoly p = moment_sum(k, m);
            ++checked;
            if (coefficient(p, k, 0) != Rational(1, cpp_int(1) << k)) ++bad;
            if (k >= 2) {
                ++checked;
                const Rational sub = Rational(k * k - k * (4 * m + 1) + 4 * m * m, 24) / Rational(cpp_int(1) << (k - 2));
                if (coefficient(p, k - 2, 2) != sub) ++bad;
            }
        }
    return {bad == 0, fmt("%d coefficients compared exactly, %d mismatches", checked, bad)};
}

Outcome mean_correlation()
{
    const SystemParams params(10000, 101);
    const ModePair pw = ModePair::plane_wave(1);
    const double k0 = 2 * kPi;
    double worst = 0.0;
    for (int j = 0; j < 32; ++j) {
        const double x = (j + 0.5) / 32.0;
        const double trace = microcanonical_trace(assemble_C_k(pw, {x}).op, params);
        const double formula = 1e8 * (1.0 + 0.5 * std::cos(2 * k0 * x));
        worst = std::max(worst, std::abs(trace / formula - 1.0));
    }
    return {worst < 1e-3, fmt("max |ratio - 1| = %.2e over 32 offsets", worst)};
}

// (delta^2(N, n) - delta^2(N, 1)) / delta^2(N, 1): the ensemble-dependent share of the variance.
std::vector<double> excess_ratios(const ObservableFamily& family, double alpha, const std::vector<long>& Ns)
{
    std::vector<double> out;
    for (long N : Ns) {
        const long ns[] = {1, std::min(round_to_odd(std::pow(static_cast<double>(N), alpha)), N + 1)};
        const auto pts = n_sweep(N, ns, family);
        out.push_back((pts[1].variance - pts[0].variance) / pts[0].variance);
    }
    return out;
}

Outcome scaling_slopes()
{
    const ObservableFamily family = correlation_family(ModePair::plane_wave(1), {0.13});
    ScanConfig cfg;
    cfg.alpha = 0.5;
    for (long N = 1024; N <= 65536; N *= 2) cfg.Ns.push_back(N);
    const ScalingScan scan = scaling_scan(cfg, family);
    const bool slope_ok = std::abs(scan.fit.slope + 0.5) <= 0.1;

    const long N = 4096;
    const std::vector<long> ns{1, 1023, 1535, 2047, 3071, 4095};
    const auto sweep = n_sweep(N, ns, family);
    std::vector<double> x, y;
    for (std::size_t i = 1; i < sweep.size(); ++i) {
        x.push_back(static_cast<double>(sweep[i].n));
        y.push_back(sweep[i].variance - sweep[0].variance);
    }
    const double n_exponent = loglog_fit(x, y).slope;
    const bool exponent_ok = std::abs(n_exponent - 4.0) <= 0.2;

    const std::vector<long> upper{8192, 16384, 32768, 65536};
    const std::vector<double> Nd(upper.begin(), upper.end());
    const double trend_07 = loglog_fit(Nd, excess_ratios(family, 0.7, upper)).slope;
    const double trend_08 = loglog_fit(Nd, excess_ratios(family, 0.8, upper)).slope;
    const bool crossover = trend_07 < 0.0 && trend_08 > 0.0;

    return {slope_ok && exponent_ok && crossover,
            fmt("alpha=0.5 slope %.3f; n-exponent of excess %.3f; excess-share trend %.3f at alpha=0.7, %.3f at alpha=0.8",
                scan.fit.slope, n_exponent, trend_07, trend_08)};
}

Outcome monte_carlo()
{
    const ModePair pw = ModePair::plane_wave(1);
    const SystemParams params(100, 11);
    // smeared so that the second moment keeps its contact terms
    const CorrelationObservable obs = assemble_C_k(pw, {0.13}, 0.01);
    const TwoModeOperator q = second_moment_operator(obs, pw);
    const Fluctuation exact = exact_fluctuation(obs, q, params);
    EnsembleConfig cfg;
    cfg.params = params;
    cfg.samples = 10000;
    cfg.seed = 2024;
    cfg.observable = obs.op;
    cfg.second_moment = q;
    const EnsembleStatistics mc = ensemble_statistics(cfg);
    const double zm = (mc.mean - exact.mean) / mc.mean_stderr;
    const double zv = (mc.variance - exact.variance) / mc.variance_stderr;
    return {std::abs(zm) < 3.0 && std::abs(zv) < 3.0,
            fmt("mean %.6g vs %.6g (%.2f se); variance %.6g vs %.6g (%.2f se)", mc.mean, exact.mean, zm,
                mc.variance, exact.variance, zv)};
}

ModePair tabulated_modes()
{
    const std::size_t g = 32;
    std::vector<cplx> a(g), b(g);
    for (std::size_t j = 0; j < g; ++j) {
        const double r = static_cast<double>(j) / g;
        a[j] = (std::polar(1.0, 2 * kPi * r) + std::polar(1.0, 4 * kPi * r) + cplx(0, 1)) / std::sqrt(3.0);
        b[j] = std::polar(1.0, -2 * kPi * r);
    }
    return ModePair::tabulated(a, b);
}

Outcome cluster_decomposition()
{
    std::mt19937_64 gen(1008);
    const ModePair variants[] = {ModePair::plane_wave(1), tabulated_modes(),
                                 ModePair::far_field_gaussian({0.0, 10.0, 1.0, 50.0})};
    double worst = 0.0;
    long checks = 0;
    for (const auto& modes : variants) {
        const bool line = modes.domain() == Domain::RealLine;
        std::uniform_real_distribution<double> u(line ? -150.0 : 0.0, line ? 150.0 : 1.0);
        for (int trial = 0; trial < 100; ++trial)
            for (int k = 1; k <= 3; ++k) {
                std::vector<double> pts(2 * k);
                for (auto& p : pts) p = u(gen);
                for (int M = 0; M <= 2 * k; ++M) {
                    worst = std::max(worst, cluster_decompose_check(modes, M, pts));
                    ++checks;
                }
            }
    }
    return {worst < 1e-10, fmt("max residual %.2e over %ld checks", worst, checks)};
}

Outcome interference_pattern()
{
    const ModePair pw = ModePair::plane_wave(1);
    const SystemParams params(10000, 101);
    const std::size_t runs = 200, bins = 100;
    std::vector<PatternFit> fits(runs);
    std::vector<double> c2(bins, 0.0);
    std::vector<double> xs(bins);
    for (std::size_t j = 0; j < bins; ++j) xs[j] = static_cast<double>(j) / bins;
    std::mutex lock;
    parallel_for(runs, [&](std::size_t i) {
        Philox rng(9009, stream_id(i, 1));
        const PatternRun run = simulate_pattern(params, pw, bins, rng);
        const auto emp = empirical_C2(run.positions, xs, bins);
        std::lock_guard<std::mutex> guard(lock);
        fits[i] = run.fit;
        for (std::size_t j = 0; j < bins; ++j) c2[j] += emp[j].value;
    });

    std::size_t high = 0;
    const int phase_bins = 10;
    std::vector<double> phase_counts(phase_bins, 0.0);
    for (const auto& f : fits) {
        if (f.visibility >= 0.8) ++high;
        const int b = std::min(phase_bins - 1, static_cast<int>(f.phase / kPi * phase_bins));
        phase_counts[b] += 1.0;
    }
    double chi2 = 0.0;
    const double expected = static_cast<double>(runs) / phase_bins;
    for (double c : phase_counts) chi2 += (c - expected) * (c - expected) / expected;
    const double p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(phase_bins - 1), chi2));

    const double N = static_cast<double>(params.particles());
    double sq = 0.0;
    for (std::size_t j = 0; j < bins; ++j) {
        const double target = 1.0 + 0.5 * std::cos(2 * 2 * kPi * xs[j]);
        const double got = c2[j] / runs / (N * (N - 1));
        sq += (got - target) * (got - target) / (target * target);
    }
    const double rms = std::sqrt(sq / bins);
    const double share = static_cast<double>(high) / runs;
    return {share >= 0.95 && p_value > 0.01 && rms < 0.05,
            fmt("V >= 0.8 in %.1f%% of runs; phase chi2 %.2f (p = %.3f); C2 relative RMS %.4f", 100 * share, chi2,
                p_value, rms)};
}

Outcome far_field_suppression()
{
    std::vector<double> normalized, estimate;
    std::string detail;
    for (double d : {6.0, 8.0, 10.0}) {
        const FarFieldGaussian g{0.0, d, 1.0, 50.0};
        const ITable t = integral_table(KernelSpec::delta_comb({1.0}), ModePair::far_field_gaussian(g));
        const ConvolutionProfile prof = convolution_profile(GaussianWavepackets{g.center_a, g.center_b, g.width});
        normalized.push_back(std::abs(t(0, 1)) / std::sqrt(t.diagonal_scale()));
        estimate.push_back(std::exp(-prof.suppression_exponent));
        detail += fmt("d=%g: |I01| %.3e, |I01|/sqrt(sum |I_mm|^2) %.3e, exp(-(z0 F'')^2) %.3e; ", d,
                      std::abs(t(0, 1)), normalized.back(), estimate.back());
    }
    bool pass = normalized[0] > normalized[1] && normalized[1] > normalized[2];
    for (std::size_t i = 0; i < 3; ++i) {
        const double ratio = normalized[i] / estimate[i];
        pass = pass && ratio <= 10.0 && ratio >= 0.1;
    }
    detail.resize(detail.size() - 2);
    return {pass, detail};
}

}  // namespace

int main()
{
    struct Criterion {
        int id;
        const char* name;
        double limit_seconds;  // 0 = none
        std::function<Outcome()> body;
    };
    const Criterion criteria[] = {
        {1, "plane-wave vanishing", 10, plane_wave_vanishing},
        {2, "subleading cancellation", 30, subleading_cancellation},
        {3, "moment-sum exactness", 5, moment_exactness},
        {4, "expansion coefficients", 0, expansion_coefficients},
        {5, "mean correlation formula", 60, mean_correlation},
        {6, "scaling slopes", 600, scaling_slopes},
        {7, "Monte Carlo vs exact", 0, monte_carlo},
        {8, "cluster decomposition", 0, cluster_decomposition},
        {9, "interference pattern", 300, interference_pattern},
        {10, "far-field suppression", 0, far_field_suppression},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = c.limit_seconds == 0 || seconds < c.limit_seconds;
        const bool pass = o.pass && in_time;
        if (!pass) ++failures;
        std::string timing = fmt("%.2f s", seconds);
        if (c.limit_seconds > 0) timing += fmt(" of %.0f s", c.limit_seconds);
        std::printf("criterion %2d %-26s %s  %s [%s]\n", c.id, c.name, pass ? "PASS" : "FAIL", o.detail.c_str(),
                    timing.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of 10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}

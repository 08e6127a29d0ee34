#include "twomode/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace twomode {

namespace {

// Cumulative trapezoid integrals of |psi_a|^2, |psi_b|^2 and psi_a^* psi_b on
// the sampling grid.
struct Cumulative {
    std::vector<double> aa, bb;
    std::vector<cplx> ab;
};

Cumulative cumulative_densities(const ModePair& modes)
{
    const std::size_t g = kSamplingGrid;
    std::vector<ModeValues> v(g + 1);
    for (std::size_t j = 0; j <= g; ++j) v[j] = modes(static_cast<double>(j) / g);
    Cumulative c;
    c.aa.assign(g + 1, 0.0);
    c.bb.assign(g + 1, 0.0);
    c.ab.assign(g + 1, cplx{});
    const double h = 1.0 / static_cast<double>(g);
    for (std::size_t j = 0; j < g; ++j) {
        c.aa[j + 1] = c.aa[j] + 0.5 * h * (std::norm(v[j].a) + std::norm(v[j + 1].a));
        c.bb[j + 1] = c.bb[j] + 0.5 * h * (std::norm(v[j].b) + std::norm(v[j + 1].b));
        c.ab[j + 1] = c.ab[j] + 0.5 * h * (std::conj(v[j].a) * v[j].b + std::conj(v[j + 1].a) * v[j + 1].b);
    }
    return c;
}

// Two-mode state of `particles` bosons; amps[i] is the amplitude of
// n_a = low + i.
struct SectorState {
    long particles;
    long low;
    std::vector<cplx> amps;
};

void normalize(SectorState& s)
{
    double norm = 0.0;
    for (const auto& c : s.amps) norm += std::norm(c);
    const double scale = 1.0 / std::sqrt(norm);
    for (auto& c : s.amps) c *= scale;
    // drop negligible edges
    std::size_t lo = 0, hi = s.amps.size();
    while (hi - lo > 1 && std::norm(s.amps[lo]) < 1e-34) ++lo;
    while (hi - lo > 1 && std::norm(s.amps[hi - 1]) < 1e-34) --hi;
    if (lo > 0 || hi < s.amps.size()) {
        s.amps = std::vector<cplx>(s.amps.begin() + static_cast<long>(lo), s.amps.begin() + static_cast<long>(hi));
        s.low += static_cast<long>(lo);
    }
}

// Psi(r) = psi_a(r) a + psi_b(r) b applied to the state.
SectorState annihilate(const SectorState& s, ModeValues v)
{
    const long m = s.particles;
    const long high = s.low + static_cast<long>(s.amps.size()) - 1;
    const long lo = std::max(0L, s.low - 1);
    const long hi = std::min(high, m - 1);
    SectorState out{m - 1, lo, std::vector<cplx>(static_cast<std::size_t>(hi - lo + 1))};
    auto amp = [&](long na) -> cplx { return na < s.low || na > high ? cplx{} : s.amps[na - s.low]; };
    for (long na = lo; na <= hi; ++na) {
        const double up = std::sqrt(static_cast<double>(na + 1));
        const double down = std::sqrt(static_cast<double>(m - na));
        out.amps[na - lo] = v.a * up * amp(na + 1) + v.b * down * amp(na);
    }
    normalize(out);
    return out;
}

double fringe_wavenumber(const ModePair& modes, std::span<const double> centers, std::span<const double> counts)
{
    if (const auto* pw = std::get_if<PlaneWave>(&modes.variant())) return pw->wavenumber();
    // dominant harmonic q of the histogram; the fringe is cos(2 pi q x) = cos(2 k x)
    double best = -1.0;
    int q_best = 1;
    for (int q = 1; 2 * q < static_cast<int>(counts.size()); ++q) {
        cplx acc{};
        for (std::size_t i = 0; i < counts.size(); ++i)
            acc += counts[i] * std::polar(1.0, -2.0 * std::numbers::pi * q * centers[i]);
        if (std::abs(acc) > best) {
            best = std::abs(acc);
            q_best = q;
        }
    }
    return std::numbers::pi * q_best;
}

struct LinearFit {
    std::array<double, 3> coef{};
    double residual = 0.0;
    bool ok = false;
};

LinearFit fit_at(std::span<const double> x, std::span<const double> y, double k)
{
    double m[3][4] = {};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f[3] = {1.0, std::cos(2.0 * k * x[i]), std::sin(2.0 * k * x[i])};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) m[r][c] += f[r] * f[c];
            m[r][3] += f[r] * y[i];
        }
    }
    LinearFit out;
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        if (std::abs(m[piv][col]) < 1e-12) return out;
        std::swap(m[piv], m[col]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double factor = m[r][col] / m[col][col];
            for (int c = col; c < 4; ++c) m[r][c] -= factor * m[col][c];
        }
    }
    for (int r = 0; r < 3; ++r) out.coef[r] = m[r][3] / m[r][r];
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double model =
            out.coef[0] + out.coef[1] * std::cos(2.0 * k * x[i]) + out.coef[2] * std::sin(2.0 * k * x[i]);
        out.residual += (y[i] - model) * (y[i] - model);
    }
    out.ok = true;
    return out;
}

}  // namespace

PatternFit fit_pattern(std::span<const double> centers, std::span<const double> counts, double wavenumber)
{
    if (centers.size() != counts.size() || centers.size() < 4)
        throw std::invalid_argument("fit_pattern needs at least 4 bins");
    if (!(wavenumber > 0.0)) throw std::invalid_argument("fit_pattern needs a positive wavenumber");
    // coarse scan over +-10% of k, then golden-section refinement
    const int steps = 400;
    const double lo = 0.9 * wavenumber, hi = 1.1 * wavenumber;
    const double dk = (hi - lo) / steps;
    double best_k = wavenumber;
    double best = fit_at(centers, counts, wavenumber).residual;
    for (int i = 0; i <= steps; ++i) {
        const double k = lo + dk * i;
        const auto f = fit_at(centers, counts, k);
        if (f.ok && f.residual < best) {
            best = f.residual;
            best_k = k;
        }
    }
    double a = best_k - dk, b = best_k + dk;
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 60; ++it) {
        const double c = b - ratio * (b - a), d = a + ratio * (b - a);
        if (fit_at(centers, counts, c).residual < fit_at(centers, counts, d).residual)
            b = d;
        else
            a = c;
    }
    const double mid = 0.5 * (a + b);
    if (fit_at(centers, counts, mid).residual < best) best_k = mid;

    const auto f = fit_at(centers, counts, best_k);
    if (!f.ok || !(f.coef[0] > 0.0)) throw std::runtime_error("pattern fit did not converge");
    PatternFit out;
    out.amplitude = f.coef[0];
    out.visibility = std::hypot(f.coef[1], f.coef[2]) / f.coef[0];
    double phi = 0.5 * std::atan2(-f.coef[2], f.coef[1]);
    if (phi < 0.0) phi += std::numbers::pi;
    out.phase = phi;
    out.period = std::numbers::pi / best_k;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const double model = f.coef[0] + f.coef[1] * std::cos(2.0 * best_k * centers[i]) +
                             f.coef[2] * std::sin(2.0 * best_k * centers[i]);
        out.chi2 += (counts[i] - model) * (counts[i] - model) / std::max(model, 1.0);
    }
    return out;
}

PatternRun simulate_pattern(const SystemParams& params, const ModePair& modes, std::size_t bins, Philox& rng)
{
    return simulate_pattern(sample_state(params, rng), modes, bins, rng);
}

PatternRun simulate_pattern(const StateVector& state, const ModePair& modes, std::size_t bins, Philox& rng)
{
    if (modes.domain() != Domain::PeriodicUnit)
        throw std::invalid_argument("pattern simulation requires modes on the periodic unit interval");
    if (bins < 4) throw std::invalid_argument("pattern simulation needs at least 4 bins");
    const SystemParams& params = state.params();
    const Cumulative cum = cumulative_densities(modes);
    const std::size_t g = kSamplingGrid;

    SectorState s{params.particles(), params.particles() / 2 - params.half_width(),
                  std::vector<cplx>(state.amplitudes().begin(), state.amplitudes().end())};
    PatternRun run;
    run.positions.reserve(static_cast<std::size_t>(params.particles()));
    std::vector<double> cdf(g + 1);
    while (s.particles > 0) {
        const long m = s.particles;
        double na = 0.0;
        cplx ab{};  // <a^dag b>
        for (std::size_t i = 0; i < s.amps.size(); ++i) {
            const long occ = s.low + static_cast<long>(i);
            na += static_cast<double>(occ) * std::norm(s.amps[i]);
            if (i + 1 < s.amps.size())
                ab += std::conj(s.amps[i + 1]) * s.amps[i] *
                      std::sqrt(static_cast<double>(occ + 1) * static_cast<double>(m - occ));
        }
        const double nb = static_cast<double>(m) - na;
        for (std::size_t j = 0; j <= g; ++j)
            cdf[j] = (na * cum.aa[j] + nb * cum.bb[j] + 2.0 * (cum.ab[j] * ab).real()) / static_cast<double>(m);
        run.max_normalization_error = std::max(run.max_normalization_error, std::abs(cdf[g] - 1.0));

        const double u = rng.uniform() * cdf[g];
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t j = static_cast<std::size_t>(std::max<long>(0, (it - cdf.begin()) - 1));
        j = std::min(j, g - 1);
        const double width = cdf[j + 1] - cdf[j];
        const double frac = width > 0.0 ? std::clamp((u - cdf[j]) / width, 0.0, 1.0) : 0.5;
        const double r = (static_cast<double>(j) + frac) / static_cast<double>(g);
        run.positions.push_back(r);
        s = annihilate(s, modes(r));
    }

    run.bin_centers.resize(bins);
    run.counts.assign(bins, 0.0);
    for (std::size_t i = 0; i < bins; ++i) run.bin_centers[i] = (static_cast<double>(i) + 0.5) / bins;
    for (double r : run.positions)
        run.counts[std::min(bins - 1, static_cast<std::size_t>(r * static_cast<double>(bins)))] += 1.0;
    run.fit = fit_pattern(run.bin_centers, run.counts, fringe_wavenumber(modes, run.bin_centers, run.counts));
    return run;
}

std::vector<EmpiricalPoint> empirical_C2(std::span<const double> positions, std::span<const double> xs,
                                         std::size_t bins)
{
    if (bins < 2) throw std::invalid_argument("empirical_C2 needs at least 2 bins");
    std::vector<double> hist(bins, 0.0);
    for (double r : positions) {
        double w = r - std::floor(r);
        hist[std::min(bins - 1, static_cast<std::size_t>(w * static_cast<double>(bins)))] += 1.0;
    }
    const double count = static_cast<double>(positions.size());
    std::vector<EmpiricalPoint> out;
    for (double x : xs) {
        const double lag = x * static_cast<double>(bins);
        if (std::abs(lag - std::round(lag)) > 1e-6)
            throw std::invalid_argument("separation " + std::to_string(x) + " is not a multiple of the bin width 1/" +
                                        std::to_string(bins));
        long s = std::lround(lag) % static_cast<long>(bins);
        if (s < 0) s += static_cast<long>(bins);
        double pairs = 0.0;
        for (std::size_t j = 0; j < bins; ++j) pairs += hist[j] * hist[(j + static_cast<std::size_t>(s)) % bins];
        if (s == 0) pairs -= count;
        out.push_back({x, pairs * static_cast<double>(bins)});
    }
    return out;
}

void write_pattern_csv(std::ostream& out, const PatternRun& run)
{
    out << "# schema: twomode.pattern/1\n";
    out << "bin_center,counts\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < run.counts.size(); ++i) out << run.bin_centers[i] << ',' << run.counts[i] << '\n';
}

nlohmann::json pattern_fit_json(const PatternRun& run)
{
    return {{"schema", "twomode.pattern-fit/1"},
            {"particles", run.positions.size()},
            {"bins", run.counts.size()},
            {"V", run.fit.visibility},
            {"phi", run.fit.phase},
            {"period", run.fit.period},
            {"amplitude", run.fit.amplitude},
            {"chi2", run.fit.chi2}};
}

}  // namespace twomode

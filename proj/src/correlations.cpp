#include "twomode/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace twomode {

namespace {

// delta function smeared into a Gaussian of standard deviation eps * sqrt(2)
double smeared_delta(double d, double eps)
{
    return std::exp(-d * d / (4.0 * eps * eps)) / (2.0 * eps * std::sqrt(std::numbers::pi));
}

// Set partitions of {0..k-1} as restricted growth strings.
std::vector<std::vector<int>> set_partitions(int k)
{
    std::vector<std::vector<int>> out;
    std::vector<int> block(k, 0);
    std::function<void(int, int)> rec = [&](int i, int used) {
        if (i == k) {
            out.push_back(block);
            return;
        }
        for (int b = 0; b <= used; ++b) {
            block[i] = b;
            rec(i + 1, std::max(used, b + 1));
        }
    };
    if (k > 0) rec(1, 1);
    return out;
}

TwoModeOperator product_at(const ModePair& modes, const std::vector<double>& points)
{
    std::vector<double> rel;
    for (std::size_t i = 1; i < points.size(); ++i) rel.push_back(points[i] - points[0]);
    return integrated_density_product(modes, rel);
}

}  // namespace

TwoModeOperator operator_from_table(const ITable& table)
{
    const int k = table.order();
    TwoModeOperator op;
    for (int m = 0; m <= k; ++m)
        for (int mp = 0; mp <= k; ++mp) {
            const cplx c = table(m, mp);
            if (c != cplx{}) op.add({mp, k - mp, m, k - m, c});
        }
    return op;
}

TwoModeOperator integrated_density_product(const ModePair& modes, std::span<const double> offsets)
{
    return operator_from_table(density_product_table(modes, offsets));
}

CorrelationObservable assemble_C_k(const ModePair& modes, std::vector<double> offsets, double smearing)
{
    const int k = static_cast<int>(offsets.size()) + 1;
    if (k > 3) throw std::invalid_argument("assemble_C_k supports k <= 3, got k = " + std::to_string(k));
    const auto kernel = KernelSpec::delta_comb(offsets, smearing);

    CorrelationObservable obs;
    obs.order = k;
    obs.offsets = offsets;
    obs.smearing = smearing;
    obs.leading = operator_from_table(integral_table(kernel, modes));
    obs.op = obs.leading;
    if (smearing > 0.0) {
        std::vector<double> points{0.0};
        points.insert(points.end(), offsets.begin(), offsets.end());
        for (const auto& blocks : set_partitions(k)) {
            const int count = *std::max_element(blocks.begin(), blocks.end()) + 1;
            if (count == k) continue;
            double weight = 1.0;
            std::vector<int> last(count, -1);
            std::vector<double> merged;
            for (int i = 0; i < k; ++i) {
                const int b = blocks[i];
                if (last[b] < 0)
                    merged.push_back(points[i]);
                else
                    weight *= smeared_delta(points[i] - points[last[b]], smearing);
                last[b] = i;
            }
            obs.op = obs.op + product_at(modes, merged) * weight;
        }
        obs.includes_lower_order = true;
    }
    return obs;
}

TwoModeOperator second_moment_operator(const CorrelationObservable& obs, const ModePair& modes,
                                       std::optional<double> contact)
{
    const int k = obs.order;
    if (!contact && obs.smearing > 0.0) contact = 1.0 / (2.0 * obs.smearing * std::sqrt(std::numbers::pi));
    std::vector<double> points{0.0};
    points.insert(points.end(), obs.offsets.begin(), obs.offsets.end());

    const bool periodic = modes.domain() == Domain::PeriodicUnit;
    TwoModeOperator q = normal_product(obs.leading, obs.leading);

    // partner[i] = index in the second factor contracted with point i, or -1
    std::vector<int> partner(k, -1);
    std::vector<bool> taken(k, false);
    std::function<void(int)> rec = [&](int i) {
        if (i == k) {
            int first = -1;
            for (int j = 0; j < k; ++j)
                if (partner[j] >= 0) {
                    first = j;
                    break;
                }
            if (first < 0) return;
            const double s = points[first] - points[partner[first]];
            double weight = 1.0;
            for (int j = first + 1; j < k; ++j) {
                if (partner[j] < 0) continue;
                double d = points[j] - points[partner[j]] - s;
                if (periodic) d -= std::round(d);
                if (obs.smearing > 0.0) {
                    weight *= smeared_delta(d, obs.smearing);
                } else {
                    if (std::abs(d) > 1e-14 || !contact) return;
                    weight *= *contact;
                }
            }
            std::vector<double> merged(points);
            for (int j = 0; j < k; ++j)
                if (!taken[j]) merged.push_back(s + points[j]);
            q = q + product_at(modes, merged) * weight;
            return;
        }
        rec(i + 1);
        for (int j = 0; j < k; ++j) {
            if (taken[j]) continue;
            taken[j] = true;
            partner[i] = j;
            rec(i + 1);
            partner[i] = -1;
            taken[j] = false;
        }
    };
    rec(0);
    return q;
}

namespace {

Fluctuation finish(double mean, double variance)
{
    Fluctuation f;
    f.mean = mean;
    f.variance = variance;
    f.relative_squared = variance / (mean * mean);
    f.relative = std::sqrt(std::max(variance, 0.0)) / std::abs(mean);
    return f;
}

}  // namespace

Fluctuation exact_fluctuation(const CorrelationObservable& obs, const TwoModeOperator& second_moment,
                              const SystemParams& params)
{
    return exact_fluctuation(obs.op, second_moment, params);
}

Fluctuation exact_fluctuation(const TwoModeOperator& op, const TwoModeOperator& second_moment,
                              const SystemParams& params)
{
    const BandMatrix a = to_band_matrix(op, params);
    const BandMatrix q = to_band_matrix(second_moment, params);
    const double mean = microcanonical_trace(a);
    // (1/n) sum_i (Q_ii - A_ii^2) + (1/n) sum_i (A_ii - mean)^2
    double acc = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const double d = a(i, i).real();
        acc += (q(i, i).real() - d * d) + (d - mean) * (d - mean);
    }
    return finish(mean, acc / static_cast<double>(a.dim()));
}

Fluctuation projected_fluctuation(const CorrelationObservable& obs, const SystemParams& params)
{
    return finish(microcanonical_trace(obs.op, params), ensemble_variance_exact(obs.op, params));
}

double mean_C2_leading(const ModePair& modes, double x, long particles)
{
    const double offsets[] = {x};
    const ITable t = density_product_table(modes, offsets);
    double sum = 0.0;
    for (int m = 0; m <= 2; ++m) sum += t(m, m).real();
    const double n = static_cast<double>(particles);
    return n * n / 4.0 * sum;
}

double ClassicalPattern::density(double x) const
{
    const double k = wavenumber;
    // int_0^1 2 cos^2(k r + phi) dr
    const double unit =
        k == 0.0 ? 2.0 * std::cos(phase) * std::cos(phase)
                 : 1.0 + (std::sin(2.0 * k + 2.0 * phase) - std::sin(2.0 * phase)) / (2.0 * k);
    const double c = std::cos(k * x + phase);
    return 2.0 * static_cast<double>(particles) / unit * c * c;
}

double ClassicalPattern::autocorrelation(double x, std::size_t points) const
{
    double acc = 0.0;
    for (std::size_t j = 0; j < points; ++j) {
        const double r = static_cast<double>(j) / static_cast<double>(points);
        acc += density(r) * density(r + x);
    }
    return acc / static_cast<double>(points);
}

std::vector<CorrelationPoint> correlation_curve(const ModePair& modes, std::span<const double> xs,
                                                const SystemParams& params)
{
    std::vector<CorrelationPoint> out;
    for (double x : xs) {
        const auto obs = assemble_C_k(modes, {x});
        out.push_back({x, microcanonical_trace(obs.op, params), mean_C2_leading(modes, x, params.particles())});
    }
    return out;
}

void write_correlation_csv(std::ostream& out, std::span<const CorrelationPoint> curve)
{
    out << "# schema: twomode.correlation/1\n";
    out << "x,exact_trace,leading_formula\n";
    out << std::setprecision(17);
    for (const auto& p : curve) out << p.x << ',' << p.exact_trace << ',' << p.leading << '\n';
}

}  // namespace twomode

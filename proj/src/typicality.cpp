#include "twomode/typicality.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace twomode {

namespace {

// Physicists' Gauss-Hermite rule, 8 nodes (symmetric pairs).
constexpr std::array<double, 4> kHermiteNodes{0.3811869902073221, 1.1571937124467802, 1.9816567566958429,
                                              2.9306374202572440};
constexpr std::array<double, 4> kHermiteWeights{0.6611470125582413, 0.2078023258148919, 0.0170779830074134,
                                                0.0001996040722114};

std::vector<double> comb_points(double r, std::span<const double> offsets)
{
    std::vector<double> pts{r};
    for (double x : offsets) pts.push_back(r + x);
    return pts;
}

// all Phi_m at one point tuple, m = 0..k
std::vector<cplx> all_phis(const ModePair& modes, std::span<const double> points)
{
    const auto values = evaluate(modes, points);
    std::vector<cplx> out(points.size() + 1);
    for (std::size_t m = 0; m < out.size(); ++m) out[m] = phi_from_values(values, static_cast<int>(m));
    return out;
}

void accumulate(ITable& table, std::span<const cplx> phis, double weight)
{
    const int k = table.order();
    for (int m = 0; m <= k; ++m)
        for (int mp = m; mp <= k; ++mp) table.at(m, mp) += weight * std::conj(phis[mp]) * phis[m];
}

void symmetrize(ITable& table)
{
    const int k = table.order();
    for (int m = 0; m <= k; ++m) {
        table.at(m, m) = table(m, m).real();
        for (int mp = m + 1; mp <= k; ++mp) table.at(mp, m) = std::conj(table(m, mp));
    }
}

ITable delta_comb_quadrature(const ModePair& modes, std::span<const double> offsets)
{
    const int k = static_cast<int>(offsets.size()) + 1;
    const auto [lo, hi] = modes.support();
    const bool periodic = modes.domain() == Domain::PeriodicUnit;

    ITable sums(k);  // unweighted sums of the integrand over all nodes so far
    auto add_node = [&](double r, double w) { accumulate(sums, all_phis(modes, comb_points(r, offsets)), w); };

    std::size_t count = 64;
    const double length = hi - lo;
    if (periodic) {
        for (std::size_t j = 0; j < count; ++j) add_node(lo + length * j / count, 1.0);
    } else {
        for (std::size_t j = 0; j <= count; ++j) add_node(lo + length * j / count, (j == 0 || j == count) ? 0.5 : 1.0);
    }
    auto estimate = [&](std::size_t c) {
        ITable t(k);
        const double h = length / static_cast<double>(c);
        for (int m = 0; m <= k; ++m)
            for (int mp = m; mp <= k; ++mp) t.at(m, mp) = sums(m, mp) * h;
        return t;
    };
    ITable current = estimate(count);
    while (true) {
        if (count * 2 > kQuadratureMaxPoints)
            throw QuadratureError("quadrature did not converge to relative change " +
                                  std::to_string(kQuadratureTolerance) + " within " +
                                  std::to_string(kQuadratureMaxPoints) + " points");
        for (std::size_t j = 1; j < 2 * count; j += 2) add_node(lo + length * j / (2 * count), 1.0);
        count *= 2;
        ITable next = estimate(count);
        double scale = 0.0, change = 0.0;
        for (int m = 0; m <= k; ++m) {
            scale = std::max(scale, std::abs(next(m, m)));
            for (int mp = m; mp <= k; ++mp) change = std::max(change, std::abs(next(m, mp) - current(m, mp)));
        }
        current = next;
        if (count >= 256 && change <= kQuadratureTolerance * std::max(scale, 1e-300)) break;
    }
    symmetrize(current);
    return current;
}

// Box orthogonality: on the periodic unit interval, Phi_m(r, r+x..) =
// exp(i k0 (2m - k) r) Phi_m(0, x..), so off-diagonal entries vanish and
// I_{m,m} = |Phi_m(0, x..)|^2. Entries above k/2 mirror the lower half,
// which equals them by the a <-> b exchange (k0 -> -k0).
ITable delta_comb_plane_wave(const ModePair& modes, std::span<const double> offsets)
{
    const int k = static_cast<int>(offsets.size()) + 1;
    ITable t(k);
    const auto phis = all_phis(modes, comb_points(0.0, offsets));
    for (int m = 0; 2 * m <= k; ++m) {
        t.at(m, m) = std::norm(phis[m]);
        t.at(k - m, k - m) = t(m, m);
    }
    return t;
}

ITable grid_kernel_table(const GridKernel& kernel, const ModePair& modes)
{
    if (modes.domain() != Domain::PeriodicUnit)
        throw std::invalid_argument("grid kernels require modes on the periodic unit interval");
    const int k = kernel.order;
    const std::size_t g = kernel.grid;
    std::vector<ModeValues> grid_values(g);
    for (std::size_t j = 0; j < g; ++j) grid_values[j] = modes(static_cast<double>(j) / g);

    ITable t(k);
    std::vector<std::size_t> idx(k, 0);
    std::vector<ModeValues> vals(k);
    const double weight = std::pow(1.0 / static_cast<double>(g), k);
    for (std::size_t flat = 0; flat < kernel.values.size(); ++flat) {
        const double kv = kernel.values[flat];
        if (kv != 0.0) {
            for (int i = 0; i < k; ++i) vals[i] = grid_values[idx[i]];
            std::vector<cplx> phis(k + 1);
            for (int m = 0; m <= k; ++m) phis[m] = phi_from_values(vals, m);
            accumulate(t, phis, kv * weight);
        }
        for (int i = k - 1; i >= 0; --i) {
            if (++idx[i] < g) break;
            idx[i] = 0;
        }
    }
    symmetrize(t);
    return t;
}

ITable smeared(const DeltaComb& comb, const std::function<ITable(std::span<const double>)>& table_at)
{
    if (comb.smearing <= 0.0) return table_at(comb.offsets);
    const std::size_t d = comb.offsets.size();
    const int k = static_cast<int>(d) + 1;
    ITable avg(k);
    std::vector<int> node(d, 0);  // index into the 8 signed nodes
    const std::size_t total = static_cast<std::size_t>(std::pow(8.0, static_cast<double>(d)));
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::vector<double> shifted(d);
        double weight = 1.0;
        for (std::size_t i = 0; i < d; ++i) {
            const int j = node[i];
            const double x = (j < 4 ? -1.0 : 1.0) * kHermiteNodes[j % 4];
            shifted[i] = comb.offsets[i] + std::sqrt(2.0) * comb.smearing * x;
            weight *= kHermiteWeights[j % 4] / std::sqrt(std::numbers::pi);
        }
        const ITable t = table_at(shifted);
        for (int m = 0; m <= k; ++m)
            for (int mp = 0; mp <= k; ++mp) avg.at(m, mp) += weight * t(m, mp);
        for (std::size_t i = 0; i < d; ++i) {
            if (++node[i] < 8) break;
            node[i] = 0;
        }
    }
    symmetrize(avg);
    return avg;
}

std::pair<int, int> cluster_bounds(int M, int k) { return {std::max(0, M - k), std::min(M, k)}; }

Rational exact(double v) { return Rational(v); }

}  // namespace

// ---------------------------------------------------------------------------

KernelSpec KernelSpec::delta_comb(std::vector<double> offsets, double smearing)
{
    if (offsets.size() + 1 > static_cast<std::size_t>(kMaxOrder))
        throw std::invalid_argument("delta-comb kernel order above cap");
    if (smearing < 0.0) throw std::invalid_argument("smearing width must be non-negative");
    if (smearing == 0.0) {
        for (std::size_t i = 0; i < offsets.size(); ++i) {
            if (offsets[i] == 0.0)
                throw std::invalid_argument("delta-comb offsets must be nonzero without smearing");
            for (std::size_t j = 0; j < i; ++j)
                if (offsets[i] == offsets[j])
                    throw std::invalid_argument("delta-comb offsets must be pairwise distinct without smearing");
        }
    }
    return KernelSpec(DeltaComb{std::move(offsets), smearing});
}

KernelSpec KernelSpec::grid(int order, std::size_t grid, std::vector<double> values)
{
    if (order < 1 || order > kMaxOrder) throw std::invalid_argument("grid kernel order outside [1, 6]");
    if (grid < 2) throw std::invalid_argument("grid kernel needs at least two points per axis");
    if (values.size() != static_cast<std::size_t>(std::pow(static_cast<double>(grid), order)))
        throw std::invalid_argument("grid kernel has the wrong number of values");
    return KernelSpec(GridKernel{order, grid, std::move(values)});
}

int KernelSpec::order() const
{
    if (const auto* c = std::get_if<DeltaComb>(&variant_)) return static_cast<int>(c->offsets.size()) + 1;
    return std::get<GridKernel>(variant_).order;
}

std::string KernelSpec::describe() const
{
    std::ostringstream os;
    os.precision(12);
    if (const auto* c = std::get_if<DeltaComb>(&variant_)) {
        os << 'c' << c->offsets.size() + 1;
        for (std::size_t i = 0; i < c->offsets.size(); ++i) os << (i == 0 ? ":" : ",") << 'x' << i + 1 << '=' << c->offsets[i];
        if (c->smearing > 0.0) os << ",eps=" << c->smearing;
    } else {
        const auto& g = std::get<GridKernel>(variant_);
        os << "grid:k=" << g.order << ",G=" << g.grid;
    }
    return os.str();
}

double ITable::diagonal_scale() const
{
    double s = 0.0;
    for (int m = 0; m <= order_; ++m) s += std::norm((*this)(m, m));
    return s;
}

double ITable::max_off_diagonal() const
{
    double s = 0.0;
    for (int m = 0; m <= order_; ++m)
        for (int mp = 0; mp <= order_; ++mp)
            if (m != mp) s = std::max(s, std::abs((*this)(m, mp)));
    return s;
}

ITable integral_table(const KernelSpec& kernel, const ModePair& modes)
{
    if (const auto* comb = std::get_if<DeltaComb>(&kernel.variant())) {
        if (std::holds_alternative<PlaneWave>(modes.variant()))
            return smeared(*comb, [&](std::span<const double> x) { return delta_comb_plane_wave(modes, x); });
        return smeared(*comb, [&](std::span<const double> x) { return delta_comb_quadrature(modes, x); });
    }
    return grid_kernel_table(std::get<GridKernel>(kernel.variant()), modes);
}

ITable integral_table_quadrature(const KernelSpec& kernel, const ModePair& modes)
{
    if (const auto* comb = std::get_if<DeltaComb>(&kernel.variant()))
        return smeared(*comb, [&](std::span<const double> x) { return delta_comb_quadrature(modes, x); });
    return grid_kernel_table(std::get<GridKernel>(kernel.variant()), modes);
}

ITable density_product_table(const ModePair& modes, std::span<const double> offsets)
{
    if (offsets.size() + 1 > static_cast<std::size_t>(kMaxOrder))
        throw std::invalid_argument("density product order above cap");
    if (std::holds_alternative<PlaneWave>(modes.variant())) return delta_comb_plane_wave(modes, offsets);
    return delta_comb_quadrature(modes, offsets);
}

cplx integral_I(const KernelSpec& kernel, const ModePair& modes, int m, int mp)
{
    const int k = kernel.order();
    if (m < 0 || m > k || mp < 0 || mp > k) throw std::invalid_argument("I index outside [0, k]");
    return integral_table(kernel, modes)(m, mp);
}

double integral_J(const ITable& table)
{
    const int k = table.order();
    double j = 0.0;
    for (int m = 0; 2 * m < k; ++m) j += (k - 2 * m) * (table(m, m).real() - table(k - m, k - m).real());
    return j;
}

double integral_J(const KernelSpec& kernel, const ModePair& modes) { return integral_J(integral_table(kernel, modes)); }

double coefficient_D_2k0(const ITable& table)
{
    const int k = table.order();
    double d = 0.0;
    for (int M = 0; M <= 2 * k; ++M) {
        const auto [lo, hi] = cluster_bounds(M, k);
        for (int m = lo; m <= hi; ++m)
            for (int mp = lo; mp <= hi; ++mp)
                if (m != mp) d += (table(M - m, M - mp) * table(m, mp)).real();
    }
    return d;
}

double coefficient_D_2k2(const ITable& table)
{
    const int k = table.order();
    const double J = integral_J(table);
    double s = 0.0;
    for (int M = 0; M <= 2 * k; ++M) {
        const auto [lo, hi] = cluster_bounds(M, k);
        const double weight = 2.0 * k * k - k * (4.0 * M + 1.0) + 2.0 * M * M;
        for (int m = lo; m <= hi; ++m)
            for (int mp = lo; mp <= hi; ++mp)
                if (m != mp) s += (table(M - m, M - mp) * table(m, mp)).real() * weight;
    }
    return (J * J + s) / 12.0;
}

BivariatePoly variance_polynomial(const ITable& table)
{
    const int k = table.order();
    if (k < 1 || k > 3) throw std::invalid_argument("variance_polynomial supports 1 <= k <= 3");

    std::vector<Rational> re((k + 1) * (k + 1)), im((k + 1) * (k + 1));
    for (int m = 0; m <= k; ++m)
        for (int mp = 0; mp <= k; ++mp) {
            re[m * (k + 1) + mp] = exact(table(m, mp).real());
            im[m * (k + 1) + mp] = exact(table(m, mp).imag());
        }
    auto idx = [k](int m, int mp) { return m * (k + 1) + mp; };

    BivariatePoly second;
    for (int M = 0; M <= 2 * k; ++M) {
        const auto [lo, hi] = cluster_bounds(M, k);
        Rational weight = 0;
        for (int m = lo; m <= hi; ++m)
            for (int mp = lo; mp <= hi; ++mp) {
                const int a = idx(M - m, M - mp), b = idx(m, mp);
                weight += re[a] * re[b] - im[a] * im[b];
            }
        second += moment_sum(2 * k, M) * weight;
    }
    BivariatePoly mean;
    for (int m = 0; m <= k; ++m) mean += moment_sum(k, m) * re[idx(m, m)];
    BivariatePoly variance = second - mean * mean;

    const double scale = std::max(table.diagonal_scale(), 1e-300);
    const double lead = static_cast<double>(variance.coefficient(2 * k, 0)) * std::pow(2.0, 2 * k);
    const double sub = static_cast<double>(variance.coefficient(2 * k - 2, 2)) * std::pow(2.0, 2 * k - 2);
    const double d0 = coefficient_D_2k0(table);
    const double d2 = coefficient_D_2k2(table);
    if (std::abs(lead - d0) > 1e-8 * scale || std::abs(sub - d2) > 1e-8 * scale * k * k)
        throw ConsistencyError("variance polynomial coefficients disagree with closed-form D coefficients");
    return variance;
}

BivariatePoly variance_polynomial(const KernelSpec& kernel, const ModePair& modes)
{
    return variance_polynomial(integral_table(kernel, modes));
}

// ---------------------------------------------------------------------------

TypicalityReport analyze(const ITable& table, std::string kernel_name, std::string mode_variant)
{
    TypicalityReport r;
    r.order = table.order();
    r.kernel = std::move(kernel_name);
    r.mode_variant = std::move(mode_variant);
    r.table = table;
    r.J = integral_J(table);
    r.D_2k0 = coefficient_D_2k0(table);
    r.D_2k2 = coefficient_D_2k2(table);
    r.scale = table.diagonal_scale();
    r.verdict = std::abs(r.D_2k0) < r.tolerance * r.scale ? Verdict::Typical : Verdict::NotTypical;
    r.subleading_vanishes = std::abs(r.D_2k2) < r.tolerance * r.scale;
    return r;
}

TypicalityReport analyze(const KernelSpec& kernel, const ModePair& modes)
{
    TypicalityReport r = analyze(integral_table(kernel, modes), kernel.describe(), modes.variant_name());
    if (modes.domain() == Domain::RealLine) {
        const auto profile = convolution_profile(modes);
        r.suppression_exponent = profile.suppression_exponent;
        r.tolerance = std::max(kTypicalityTolerance, std::exp(-profile.suppression_exponent));
        r.verdict = std::abs(r.D_2k0) < r.tolerance * r.scale ? Verdict::Typical : Verdict::NotTypical;
        r.subleading_vanishes = std::abs(r.D_2k2) < r.tolerance * r.scale;
    }
    return r;
}

nlohmann::json TypicalityReport::to_json() const
{
    nlohmann::json itab = nlohmann::json::array();
    for (int m = 0; m <= order; ++m) {
        nlohmann::json row = nlohmann::json::array();
        for (int mp = 0; mp <= order; ++mp) row.push_back({table(m, mp).real(), table(m, mp).imag()});
        itab.push_back(row);
    }
    const bool typical = verdict == Verdict::Typical;
    nlohmann::json regime;
    if (typical) {
        const double crossover = subleading_vanishes ? 0.75 : 0.5;
        regime = {{"crossover_alpha", crossover},
                  {"relfluct_exponent_below", -0.5},
                  {"relfluct_exponent_above", subleading_vanishes ? "2*(alpha-1)" : "alpha-1"},
                  {"relvar_exponent_above", subleading_vanishes ? "4*(alpha-1)" : "2*(alpha-1)"}};
    } else {
        regime = {{"relfluct_exponent", 0.0}, {"note", "no concentration: fluctuations are O(1) relative"}};
    }
    nlohmann::json doc = {{"schema", "twomode.typicality/1"},
                          {"k", order},
                          {"kernel", kernel},
                          {"mode_variant", mode_variant},
                          {"I_table", itab},
                          {"J", J},
                          {"D_2k0", D_2k0},
                          {"D_2k2", D_2k2},
                          {"scale", scale},
                          {"tolerance", tolerance},
                          {"verdict", typical ? "typical" : "not typical"},
                          {"regime", regime}};
    if (suppression_exponent) doc["suppression_exponent"] = *suppression_exponent;
    return doc;
}

ScalingPrediction classify_regime(const TypicalityReport& report, double alpha)
{
    if (report.verdict != Verdict::Typical)
        throw std::domain_error("observable is not typical: relative fluctuations stay O(1)");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
    ScalingPrediction p{};
    p.crossover_alpha = report.subleading_vanishes ? 0.75 : 0.5;
    if (alpha <= p.crossover_alpha) {
        p.relfluct_exponent = -0.5;
        p.ensemble_dependent = false;
    } else {
        // (n/N)^2 per unit of relative variance without D_{2k-2,2}; (n/N) with it
        p.relfluct_exponent = report.subleading_vanishes ? 2.0 * (alpha - 1.0) : alpha - 1.0;
        p.ensemble_dependent = true;
    }
    p.relvar_exponent = 2.0 * p.relfluct_exponent;
    return p;
}

}  // namespace twomode

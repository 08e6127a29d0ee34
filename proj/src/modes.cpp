#include "twomode/modes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace twomode {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<cplx> periodic_dft(const std::vector<cplx>& values)
{
    const std::size_t g = values.size();
    const long half = static_cast<long>(g / 2);
    std::vector<cplx> out(g);
    for (long k = -half; k < static_cast<long>(g) - half; ++k) {
        cplx acc{};
        for (std::size_t j = 0; j < g; ++j)
            acc += values[j] * std::polar(1.0, -2.0 * kPi * static_cast<double>(k * static_cast<long>(j) % static_cast<long>(g)) / g);
        out[static_cast<std::size_t>(k + half)] = acc / static_cast<double>(g);
    }
    return out;
}

cplx trig_interpolate(const std::vector<cplx>& values, const std::vector<cplx>& fourier, double r)
{
    const std::size_t g = values.size();
    double wrapped = r - std::floor(r);
    const double pos = wrapped * static_cast<double>(g);
    const double nearest = std::round(pos);
    if (std::abs(pos - nearest) < 1e-12) return values[static_cast<std::size_t>(nearest) % g];

    const long half = static_cast<long>(g / 2);
    cplx acc{};
    for (long k = -half; k < static_cast<long>(g) - half; ++k) {
        const cplx c = fourier[static_cast<std::size_t>(k + half)];
        if (g % 2 == 0 && k == -half)
            acc += c * std::cos(2.0 * kPi * static_cast<double>(half) * wrapped);  // split Nyquist term
        else
            acc += c * std::polar(1.0, 2.0 * kPi * static_cast<double>(k) * wrapped);
    }
    return acc;
}

double factorial(int n)
{
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

void check_order(int m, std::size_t k)
{
    if (k == 0) throw std::invalid_argument("symmetrized product needs at least one point");
    if (k > static_cast<std::size_t>(kMaxOrder))
        throw std::invalid_argument("particle order k = " + std::to_string(k) + " exceeds the cap " +
                                    std::to_string(kMaxOrder));
    if (m < 0 || m > static_cast<int>(k))
        throw std::invalid_argument("mode-a count m = " + std::to_string(m) + " outside [0, " +
                                    std::to_string(k) + "]");
}

// Least-squares parabola through (x_i, y_i); returns (c0, c1, c2) in u = x - x0.
std::array<double, 3> fit_parabola(std::span<const double> x, std::span<const double> y, double x0)
{
    double s[5] = {0, 0, 0, 0, 0};
    double t[3] = {0, 0, 0};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = x[i] - x0;
        double p = 1.0;
        for (int e = 0; e < 5; ++e) {
            s[e] += p;
            if (e < 3) t[e] += p * y[i];
            p *= u;
        }
    }
    // Solve [[s0 s1 s2][s1 s2 s3][s2 s3 s4]] c = t by Cramer's rule.
    auto det3 = [](double a, double b, double c, double d, double e, double f, double g, double h, double i) {
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
    };
    const double d = det3(s[0], s[1], s[2], s[1], s[2], s[3], s[2], s[3], s[4]);
    const double c0 = det3(t[0], s[1], s[2], t[1], s[2], s[3], t[2], s[3], s[4]) / d;
    const double c1 = det3(s[0], t[0], s[2], s[1], t[1], s[3], s[2], t[2], s[4]) / d;
    const double c2 = det3(s[0], s[1], t[0], s[1], s[2], t[1], s[2], s[3], t[2]) / d;
    return {c0, c1, c2};
}

ConvolutionProfile profile_from_samples(std::vector<double> lags, const std::vector<cplx>& conv, bool periodic)
{
    ConvolutionProfile out;
    const std::size_t count = lags.size();
    std::size_t best = 0;
    for (std::size_t i = 1; i < count; ++i)
        if (std::abs(conv[i]) > std::abs(conv[best])) best = i;
    if (!periodic && (best < 2 || best + 2 >= count))
        throw std::runtime_error("mode convolution has no interior maximum on the lag grid");
    if (std::abs(conv[best]) == 0.0) throw std::runtime_error("mode convolution vanishes identically");

    out.lags = std::move(lags);
    out.log_magnitude.resize(count);
    out.phase.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.log_magnitude[i] = std::log(std::abs(conv[i]));
        out.phase[i] = std::arg(conv[i]);
    }
    const double step = out.lags[1] - out.lags[0];
    std::array<double, 5> xs{}, ys{};
    for (int o = -2; o <= 2; ++o) {
        const long idx = (static_cast<long>(best) + o + static_cast<long>(count)) % static_cast<long>(count);
        xs[o + 2] = out.lags[best] + o * step;
        ys[o + 2] = out.log_magnitude[static_cast<std::size_t>(idx)];
    }
    const auto c = fit_parabola(xs, ys, out.lags[best]);
    out.curvature = 2.0 * c[2];
    out.peak = out.lags[best] + (c[2] < 0.0 ? -c[1] / (2.0 * c[2]) : 0.0);
    const double abs_curv = std::abs(out.curvature);
    out.separation_ratio = abs_curv > 0.0 ? std::abs(out.peak) * abs_curv / (2.0 * kPi) : 0.0;
    out.separated = out.separation_ratio >= 10.0;
    out.suppression_exponent = (out.peak * out.curvature) * (out.peak * out.curvature);
    return out;
}

}  // namespace

double PlaneWave::wavenumber() const { return 2.0 * kPi * harmonic; }

ModePair ModePair::plane_wave(int harmonic)
{
    if (harmonic < 1) throw std::invalid_argument("plane-wave harmonic q must be >= 1");
    return ModePair(PlaneWave{harmonic});
}

ModePair ModePair::far_field_gaussian(const FarFieldGaussian& spec)
{
    if (!(spec.time > 0.0)) throw std::invalid_argument("far-field time must be positive");
    if (!(spec.width > 0.0)) throw std::invalid_argument("Gaussian width must be positive");
    return ModePair(spec);
}

ModePair ModePair::tabulated(std::vector<cplx> values_a, std::vector<cplx> values_b)
{
    if (values_a.size() != values_b.size() || values_a.size() < 4)
        throw std::invalid_argument("tabulated modes need equal-length grids of at least 4 points");
    const double h = 1.0 / static_cast<double>(values_a.size());
    double naa = 0.0, nbb = 0.0;
    cplx nab{};
    for (std::size_t j = 0; j < values_a.size(); ++j) {
        naa += std::norm(values_a[j]) * h;
        nbb += std::norm(values_b[j]) * h;
        nab += std::conj(values_a[j]) * values_b[j] * h;
    }
    if (std::abs(naa - 1.0) > 1e-8 || std::abs(nbb - 1.0) > 1e-8 || std::abs(nab) > 1e-8)
        throw std::invalid_argument("tabulated modes are not orthonormal on the grid (|a|^2 = " +
                                    std::to_string(naa) + ", |b|^2 = " + std::to_string(nbb) +
                                    ", |<a|b>| = " + std::to_string(std::abs(nab)) + ")");
    Tabulated tab;
    tab.fourier_a = periodic_dft(values_a);
    tab.fourier_b = periodic_dft(values_b);
    tab.values_a = std::move(values_a);
    tab.values_b = std::move(values_b);
    return ModePair(std::move(tab));
}

ModePair ModePair::load_tabulated(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open tabulated mode file '" + path + "'");
    std::vector<double> xs;
    std::vector<cplx> a, b;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream row(line);
        double x, ra, ia, rb, ib;
        if (!(row >> x >> ra >> ia >> rb >> ib))
            throw std::invalid_argument("malformed row in '" + path + "': " + line);
        xs.push_back(x);
        a.emplace_back(ra, ia);
        b.emplace_back(rb, ib);
    }
    for (std::size_t j = 0; j < xs.size(); ++j)
        if (std::abs(xs[j] - static_cast<double>(j) / xs.size()) > 1e-9)
            throw std::invalid_argument("tabulated positions must be the uniform grid j/G on [0, 1)");
    return tabulated(std::move(a), std::move(b));
}

void ModePair::save_tabulated(const std::string& path) const
{
    const auto* tab = std::get_if<Tabulated>(&variant_);
    if (!tab) throw std::invalid_argument("only tabulated modes can be saved");
    std::ofstream out(path);
    out << "# twomode tabulated modes v1\n# columns: x re_a im_a re_b im_b\n";
    out.precision(17);
    const std::size_t g = tab->values_a.size();
    for (std::size_t j = 0; j < g; ++j)
        out << static_cast<double>(j) / g << ' ' << tab->values_a[j].real() << ' ' << tab->values_a[j].imag()
            << ' ' << tab->values_b[j].real() << ' ' << tab->values_b[j].imag() << '\n';
}

ModeValues ModePair::operator()(double r) const
{
    return std::visit(
        [r](const auto& v) -> ModeValues {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, PlaneWave>) {
                const double k0 = v.wavenumber();
                return {std::polar(1.0, k0 * r), std::polar(1.0, -k0 * r)};
            } else if constexpr (std::is_same_v<T, FarFieldGaussian>) {
                return {gaussian_far_field(r, v.time, v.center_a, v.width),
                        gaussian_far_field(r, v.time, v.center_b, v.width)};
            } else {
                return {trig_interpolate(v.values_a, v.fourier_a, r),
                        trig_interpolate(v.values_b, v.fourier_b, r)};
            }
        },
        variant_);
}

std::string ModePair::variant_name() const
{
    switch (variant_.index()) {
    case 0: return "planewave";
    case 1: return "gaussian";
    default: return "tabulated";
    }
}

Domain ModePair::domain() const
{
    return std::holds_alternative<FarFieldGaussian>(variant_) ? Domain::RealLine : Domain::PeriodicUnit;
}

std::pair<double, double> ModePair::support() const
{
    if (const auto* g = std::get_if<FarFieldGaussian>(&variant_)) {
        // far-field |psi|^2 has standard deviation t / sigma about the origin
        const double spread = g->time / g->width;
        return {-14.0 * spread, 14.0 * spread};
    }
    return {0.0, 1.0};
}

bool ModePair::equal_modulus() const { return std::holds_alternative<PlaneWave>(variant_); }

// ---------------------------------------------------------------------------

cplx phi_from_values(std::span<const ModeValues> values, int m)
{
    // coefficient of t^m in prod_i (psi_b(r_i) + t psi_a(r_i))
    std::vector<cplx> poly{1.0};
    for (const auto& v : values) {
        std::vector<cplx> next(poly.size() + 1);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i] += poly[i] * v.b;
            next[i + 1] += poly[i] * v.a;
        }
        poly = std::move(next);
    }
    if (m < 0 || m >= static_cast<int>(poly.size())) return {};
    return poly[static_cast<std::size_t>(m)];
}

std::vector<ModeValues> evaluate(const ModePair& modes, std::span<const double> points)
{
    std::vector<ModeValues> out;
    out.reserve(points.size());
    for (double r : points) out.push_back(modes(r));
    return out;
}

cplx phi_m(const ModePair& modes, int m, std::span<const double> points)
{
    check_order(m, points.size());
    return phi_from_values(evaluate(modes, points), m);
}

double f_m(const ModePair& modes, int m, std::span<const double> points)
{
    return std::norm(phi_m(modes, m, points));
}

cplx phi_m_permutation_sum(const ModePair& modes, int m, std::span<const double> points)
{
    const int k = static_cast<int>(points.size());
    return phi_m(modes, m, points) * (factorial(m) * factorial(k - m));
}

double cluster_decompose_check(const ModePair& modes, int M, std::span<const double> points)
{
    if (points.size() % 2 != 0 || points.empty())
        throw std::invalid_argument("cluster decomposition needs 2k points");
    const int k = static_cast<int>(points.size() / 2);
    if (k > kMaxOrder) throw std::invalid_argument("cluster decomposition order above cap");
    if (M < 0 || M > 2 * k) throw std::invalid_argument("cluster index M outside [0, 2k]");
    const auto values = evaluate(modes, points);
    const std::span<const ModeValues> all(values);
    const cplx whole = phi_from_values(all, M);
    cplx split{};
    for (int m = std::max(0, M - k); m <= std::min(M, k); ++m)
        split += phi_from_values(all.first(k), M - m) * phi_from_values(all.last(k), m);
    return std::abs(whole - split);
}

// ---------------------------------------------------------------------------

cplx gaussian_initial(double z, double center, double width)
{
    const double w = width;
    const double u = z - center;
    return std::pow(2.0 * kPi * w * w, -0.25) * std::exp(-u * u / (4.0 * w * w));
}

cplx gaussian_fourier(double k, double center, double width)
{
    const double w = width;
    const double amp = std::pow(2.0 * kPi * w * w, -0.25) * std::sqrt(4.0 * kPi * w * w);
    return amp * std::exp(-w * w * k * k) * std::polar(1.0, -k * center);
}

cplx gaussian_evolved(double z, double t, double center, double width)
{
    const double w = width;
    const cplx s = cplx(w * w, t);
    const double amp = std::pow(2.0 * kPi * w * w, -0.25) * std::sqrt(4.0 * kPi * w * w) / (2.0 * kPi);
    const double u = z - center;
    return amp * std::sqrt(kPi / s) * std::exp(-u * u / (4.0 * s));
}

cplx gaussian_far_field(double z, double t, double center, double width)
{
    const cplx prefactor = std::polar(1.0 / std::sqrt(4.0 * kPi * t), -kPi / 4.0);
    return prefactor * std::polar(1.0, z * z / (4.0 * t)) * gaussian_fourier(z / (2.0 * t), center, width);
}

ModePair far_field(const GaussianWavepackets& initial, double t)
{
    if (!(t > 0.0)) throw std::invalid_argument("far-field evolution needs t > 0");
    return ModePair::far_field_gaussian({initial.center_a, initial.center_b, initial.width, t});
}

double effective_wavenumber(const FarFieldGaussian& spec)
{
    return (spec.center_b - spec.center_a) / (4.0 * spec.time);
}

ConvolutionProfile convolution_profile(const GaussianWavepackets& initial)
{
    if (!(initial.width > 0.0)) throw std::invalid_argument("Gaussian width must be positive");
    const double w = initial.width;
    const double lo = std::min(initial.center_a, initial.center_b) - 14.0 * w;
    const double hi = std::max(initial.center_a, initial.center_b) + 14.0 * w;
    const double dz = w / 16.0;
    const int nz = static_cast<int>(std::ceil((hi - lo) / dz));
    const double d = initial.center_b - initial.center_a;
    const double lag_lo = std::min(0.0, d) - 8.0 * w;
    const double lag_hi = std::max(0.0, d) + 8.0 * w;
    const double dl = w / 8.0;
    const int nl = static_cast<int>(std::ceil((lag_hi - lag_lo) / dl)) + 1;

    std::vector<double> lags(nl);
    std::vector<cplx> conv(nl);
    for (int i = 0; i < nl; ++i) {
        const double lag = lag_lo + i * dl;
        cplx acc{};
        for (int j = 0; j <= nz; ++j) {
            const double z = lo + j * dz;
            acc += std::conj(gaussian_initial(z, initial.center_a, w)) * gaussian_initial(z + lag, initial.center_b, w);
        }
        lags[i] = lag;
        conv[i] = acc * dz;
    }
    return profile_from_samples(std::move(lags), conv, false);
}

ConvolutionProfile convolution_profile(const ModePair& modes)
{
    if (const auto* g = std::get_if<FarFieldGaussian>(&modes.variant()))
        return convolution_profile(GaussianWavepackets{g->center_a, g->center_b, g->width});
    const auto* tab = std::get_if<Tabulated>(&modes.variant());
    if (!tab) throw std::invalid_argument("plane-wave modes have no localized convolution profile");
    const std::size_t g = tab->values_a.size();
    const long half = static_cast<long>(g / 2);
    std::vector<double> lags(g);
    std::vector<cplx> conv(g);
    for (long s = -half; s < static_cast<long>(g) - half; ++s) {
        cplx acc{};
        for (std::size_t j = 0; j < g; ++j) {
            const std::size_t shifted = static_cast<std::size_t>((static_cast<long>(j) + s + static_cast<long>(g)) % static_cast<long>(g));
            acc += std::conj(tab->values_a[j]) * tab->values_b[shifted];
        }
        lags[static_cast<std::size_t>(s + half)] = static_cast<double>(s) / g;
        conv[static_cast<std::size_t>(s + half)] = acc / static_cast<double>(g);
    }
    return profile_from_samples(std::move(lags), conv, true);
}

}  // namespace twomode

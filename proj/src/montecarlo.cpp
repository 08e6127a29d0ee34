#include "twomode/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <ostream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

namespace twomode {

unsigned thread_count()
{
    if (const char* env = std::getenv("TWOMODE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body)
{
    const std::size_t workers = std::min<std::size_t>(thread_count(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex guard;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers) body(i);
            } catch (...) {
                std::lock_guard lock(guard);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

StateVector sample_state(const SystemParams& params, Philox& rng)
{
    const auto n = static_cast<std::size_t>(params.dimension());
    std::vector<cplx> amps(n);
    double norm = 0.0;
    for (auto& c : amps) {
        const double re = rng.normal();
        const double im = rng.normal();
        c = {re, im};
        norm += re * re + im * im;
    }
    const double scale = 1.0 / std::sqrt(norm);
    for (auto& c : amps) c *= scale;
    return StateVector(params, std::move(amps));
}

namespace {

double mean_of(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v)
{
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

}  // namespace

EnsembleStatistics ensemble_statistics(const EnsembleConfig& config)
{
    if (config.samples < 1) throw std::invalid_argument("ensemble_statistics needs at least one sample");
    const SystemParams& params = config.params;
    const long n = params.dimension();
    const int w = config.observable.bandwidth();
    const long padded = std::min(n + 2L * w, params.particles() + 1);
    const BandMatrix a = to_band_matrix(config.observable, SystemParams(params.particles(), padded));
    const std::size_t first = static_cast<std::size_t>((padded - n) / 2);
    std::optional<BandMatrix> q;
    if (config.second_moment) q = to_band_matrix(*config.second_moment, params);

    std::vector<double> first_moment(config.samples), second_moment(config.samples);
    parallel_for(config.samples, [&](std::size_t i) {
        Philox rng(config.seed, stream_id(i, 0));
        const StateVector state = sample_state(params, rng);
        std::vector<cplx> embedded(static_cast<std::size_t>(padded));
        std::copy(state.amplitudes().begin(), state.amplitudes().end(), embedded.begin() + first);
        const auto image = a.apply(embedded);
        cplx e1{};
        double e2 = 0.0;
        for (std::size_t j = 0; j < embedded.size(); ++j) {
            e1 += std::conj(embedded[j]) * image[j];
            e2 += std::norm(image[j]);
        }
        first_moment[i] = e1.real();
        second_moment[i] = q ? expectation(*q, state).real() : e2;
    });

    EnsembleStatistics out;
    out.samples = config.samples;
    out.mean = mean_of(first_moment);
    out.variance = mean_of(second_moment) - out.mean * out.mean;
    out.spread = sample_variance(first_moment);

    const std::size_t batches = std::max<std::size_t>(1, std::min(config.batches, config.samples));
    const std::size_t size = config.samples / batches;
    if (size < 2 || batches < 2) out.warning = "too few samples per batch for meaningful standard errors";
    std::vector<double> batch_mean(batches), batch_var(batches);
    for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t lo = b * size;
        const std::size_t hi = b + 1 == batches ? config.samples : lo + size;
        const std::span<const double> f(first_moment.data() + lo, hi - lo);
        const std::span<const double> s(second_moment.data() + lo, hi - lo);
        batch_mean[b] = mean_of(f);
        batch_var[b] = mean_of(s) - batch_mean[b] * batch_mean[b];
    }
    const double root = std::sqrt(static_cast<double>(batches));
    out.mean_stderr = std::sqrt(sample_variance(batch_mean)) / root;
    out.variance_stderr = std::sqrt(sample_variance(batch_var)) / root;
    return out;
}

long round_to_odd(double x)
{
    long r = std::lround(x);
    if (r % 2 == 0) r += x >= static_cast<double>(r) ? 1 : -1;
    return std::max(1L, r);
}

ObservableFamily correlation_family(const ModePair& modes, std::vector<double> offsets)
{
    const auto obs = assemble_C_k(modes, std::move(offsets));
    ScanObservable fixed{obs.op, second_moment_operator(obs, modes)};
    return [fixed](const SystemParams&) { return fixed; };
}

SlopeFit loglog_fit(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) throw std::invalid_argument("loglog_fit: size mismatch");
    const std::size_t m = x.size();
    if (m < 3) throw std::invalid_argument("loglog_fit needs at least 3 points, got " + std::to_string(m));
    std::vector<double> lx(m), ly(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("loglog_fit needs positive values");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    const double mx = mean_of(lx), my = mean_of(ly);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("loglog_fit needs distinct x values");
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = ly[i] - fit.intercept - fit.slope * lx[i];
        ssr += r * r;
    }
    const double dof = static_cast<double>(m - 2);
    fit.slope_stderr = std::sqrt(ssr / dof / sxx);
    const boost::math::students_t dist(dof);
    const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
    fit.ci_low = fit.slope - t * fit.slope_stderr;
    fit.ci_high = fit.slope + t * fit.slope_stderr;
    return fit;
}

namespace {

ScanPoint exact_point(long N, long n, const ObservableFamily& family)
{
    const SystemParams params(N, n);
    const ScanObservable obs = family(params);
    ScanPoint p;
    p.N = N;
    p.n = n;
    Fluctuation f;
    if (obs.second_moment) {
        f = exact_fluctuation(obs.op, *obs.second_moment, params);
    } else {
        const double mean = microcanonical_trace(obs.op, params);
        const double var = ensemble_variance_exact(obs.op, params);
        f = {mean, var, std::sqrt(std::max(var, 0.0)) / std::abs(mean), var / (mean * mean)};
    }
    p.mean = f.mean;
    p.variance = f.variance;
    p.relfluct = f.relative;
    p.relvar = f.relative_squared;
    return p;
}

}  // namespace

ScalingScan scaling_scan(const ScanConfig& config, const ObservableFamily& family)
{
    if (config.Ns.empty()) throw std::invalid_argument("scaling_scan needs a non-empty N grid");
    ScalingScan scan;
    scan.alpha = config.alpha;
    scan.points.resize(config.Ns.size());
    parallel_for(config.Ns.size(), [&](std::size_t i) {
        const long N = config.Ns[i];
        const long n = std::min(round_to_odd(std::pow(static_cast<double>(N), config.alpha)), N + 1);
        const SystemParams params(N, n);
        const ScanObservable obs = family(params);
        int w = obs.op.bandwidth();
        if (obs.second_moment) w = std::max(w, obs.second_moment->bandwidth());
        const std::size_t bytes = static_cast<std::size_t>(n + 2 * w) * (2 * w + 1) * sizeof(cplx) * 2;
        ScanPoint p;
        if (bytes <= config.exact_memory_limit) {
            p = exact_point(N, n, family);
        } else {
            EnsembleConfig ec;
            ec.params = params;
            ec.samples = config.samples;
            ec.seed = config.seed + i;
            ec.observable = obs.op;
            ec.second_moment = obs.second_moment;
            const auto st = ensemble_statistics(ec);
            p.N = N;
            p.n = n;
            p.mean = st.mean;
            p.variance = st.variance;
            p.relfluct = std::sqrt(std::max(st.variance, 0.0)) / std::abs(st.mean);
            p.relvar = st.variance / (st.mean * st.mean);
            p.stderr_relfluct =
                st.variance > 0.0 ? st.variance_stderr / (2.0 * std::sqrt(st.variance) * std::abs(st.mean)) : 0.0;
            p.exact = false;
        }
        p.alpha = config.alpha;
        scan.points[i] = p;
    });
    std::vector<double> xs, ys;
    for (const auto& p : scan.points) {
        xs.push_back(static_cast<double>(p.N));
        ys.push_back(p.relfluct);
    }
    scan.fit = loglog_fit(xs, ys);
    return scan;
}

std::vector<ScanPoint> n_sweep(long N, std::span<const long> ns, const ObservableFamily& family)
{
    std::vector<ScanPoint> out(ns.size());
    parallel_for(ns.size(), [&](std::size_t i) {
        out[i] = exact_point(N, ns[i], family);
        out[i].alpha = std::log(static_cast<double>(ns[i])) / std::log(static_cast<double>(N));
    });
    return out;
}

void write_scan_csv(std::ostream& out, const ScalingScan& scan)
{
    out << "# schema: twomode.scan/1\n";
    out << "N,n,alpha,mean,var,relfluct,stderr\n";
    out << std::setprecision(17);
    for (const auto& p : scan.points)
        out << p.N << ',' << p.n << ',' << p.alpha << ',' << p.mean << ',' << p.variance << ',' << p.relfluct << ','
            << p.stderr_relfluct << '\n';
}

nlohmann::json scan_summary_json(const ScalingScan& scan)
{
    return {{"schema", "twomode.scan-summary/1"},
            {"alpha", scan.alpha},
            {"points", scan.points.size()},
            {"slope", scan.fit.slope},
            {"intercept", scan.fit.intercept},
            {"slope_stderr", scan.fit.slope_stderr},
            {"ci95", {scan.fit.ci_low, scan.fit.ci_high}}};
}

}  // namespace twomode

#pragma once

// Random pure states on H_n, ensemble statistics of observables over them,
// scaling scans in (N, n = N^alpha) and single-run position sampling.

#include "twomode/correlations.hpp"
#include "twomode/rng.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace twomode {

/// Worker count from TWOMODE_THREADS, else the hardware concurrency.
unsigned thread_count();

/// Runs body(i) for i in [0, count) over thread_count() workers.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// n independent standard complex Gaussians, normalized.
StateVector sample_state(const SystemParams& params, Philox& rng);

struct EnsembleConfig {
    SystemParams params{2, 1};
    std::size_t samples = 1;
    std::uint64_t seed = 0;
    TwoModeOperator observable;
    /// Second-moment operator; when absent <A^2> is the matrix square, with
    /// intermediate states outside H_n kept.
    std::optional<TwoModeOperator> second_moment;
    std::size_t batches = 20;
};

struct EnsembleStatistics {
    std::size_t samples = 0;
    double mean = 0.0;             // mean over states of <Phi|A|Phi>
    double mean_stderr = 0.0;
    double variance = 0.0;         // mean <A^2> - (mean <A>)^2
    double variance_stderr = 0.0;
    double spread = 0.0;           // sample variance of <Phi|A|Phi>
    /// Set when fewer than two samples per batch make the errors meaningless.
    std::optional<std::string> warning;
};

/// Standard errors by batch means; sample i uses stream i of the seed.
EnsembleStatistics ensemble_statistics(const EnsembleConfig& config);

/// Odd integer nearest to x, at least 1.
long round_to_odd(double x);

struct ScanObservable {
    TwoModeOperator op;
    std::optional<TwoModeOperator> second_moment;
};

using ObservableFamily = std::function<ScanObservable(const SystemParams&)>;

/// C_k at fixed offsets with its second-moment operator.
ObservableFamily correlation_family(const ModePair& modes, std::vector<double> offsets);

struct ScanPoint {
    long N = 0;
    long n = 0;
    double alpha = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    double relfluct = 0.0;      // delta A / mean
    double relvar = 0.0;        // delta A^2 / mean^2
    double stderr_relfluct = 0.0;  // 0 on the exact path
    bool exact = true;
};

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double ci_low = 0.0;   // 95% confidence interval
    double ci_high = 0.0;
};

/// Least squares of log y against log x. Throws std::invalid_argument for
/// fewer than 3 points or non-positive values.
SlopeFit loglog_fit(std::span<const double> x, std::span<const double> y);

struct ScanConfig {
    double alpha = 0.5;
    std::vector<long> Ns;
    std::size_t samples = 2000;  // Monte Carlo path only
    std::uint64_t seed = 0;
    /// Band matrices above this many bytes switch to Monte Carlo.
    std::size_t exact_memory_limit = std::size_t{1} << 30;
};

struct ScalingScan {
    double alpha = 0.0;
    std::vector<ScanPoint> points;
    SlopeFit fit;  // relfluct against N
};

/// n = round_to_odd(N^alpha), capped at N + 1.
ScalingScan scaling_scan(const ScanConfig& config, const ObservableFamily& family);

/// Exact fluctuations at fixed N for each n.
std::vector<ScanPoint> n_sweep(long N, std::span<const long> ns, const ObservableFamily& family);

void write_scan_csv(std::ostream& out, const ScalingScan& scan);
nlohmann::json scan_summary_json(const ScalingScan& scan);

// --- single-run interference pattern -----------------------------------------

inline constexpr std::size_t kSamplingGrid = std::size_t{1} << 12;

struct PatternFit {
    double amplitude = 0.0;   // A
    double visibility = 0.0;  // V
    double phase = 0.0;       // phi in [0, pi)
    double period = 0.0;      // pi / k of the fitted fringe wavenumber
    double chi2 = 0.0;
};

struct PatternRun {
    std::vector<double> positions;
    std::vector<double> bin_centers;
    std::vector<double> counts;
    PatternFit fit;
    /// Largest deviation from 1 of the integrated conditional density over all steps.
    double max_normalization_error = 0.0;
};

/// Draws a state from H_n, then detects all N particles one at a time from
/// the conditional density, applying the field annihilator at each detected
/// position. Requires periodic modes. Histogram over `bins` bins on [0, 1).
PatternRun simulate_pattern(const SystemParams& params, const ModePair& modes, std::size_t bins, Philox& rng);
/// Same, starting from a given state.
PatternRun simulate_pattern(const StateVector& state, const ModePair& modes, std::size_t bins, Philox& rng);

/// Fits counts to A [1 + V cos(2 k x + 2 phi)], searching k near `wavenumber`.
/// Throws std::runtime_error when the fit degenerates.
PatternFit fit_pattern(std::span<const double> centers, std::span<const double> counts, double wavenumber);

struct EmpiricalPoint {
    double x = 0.0;
    double value = 0.0;  // estimate of sum_{i != j} delta(x - (r_j - r_i))
};

/// Pair-separation histogram on `bins` periodic bins. Every x must be a
/// multiple of 1/bins, else std::invalid_argument.
std::vector<EmpiricalPoint> empirical_C2(std::span<const double> positions, std::span<const double> xs,
                                         std::size_t bins);

void write_pattern_csv(std::ostream& out, const PatternRun& run);
nlohmann::json pattern_fit_json(const PatternRun& run);

}  // namespace twomode

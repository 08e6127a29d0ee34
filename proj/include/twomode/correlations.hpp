#pragma once

// Integrated density correlations C_k(x_1..x_{k-1}) = int dr rho(r) rho(r + x_1) ..
// reduced to the two-mode algebra.

#include "twomode/typicality.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace twomode {

/// sum_{m,m'} I_{m,m'} (a^dag)^{m'} (b^dag)^{k-m'} a^m b^{k-m}
TwoModeOperator operator_from_table(const ITable& table);

/// int dr :rho(r) rho(r + x_1) ..: as a two-mode operator; offsets may coincide.
TwoModeOperator integrated_density_product(const ModePair& modes, std::span<const double> offsets);

struct CorrelationObservable {
    int order = 0;
    std::vector<double> offsets;
    double smearing = 0.0;
    TwoModeOperator leading;  // the normal-ordered k-point term alone
    TwoModeOperator op;
    /// Whether contact terms from normal ordering are part of `op`. They vanish
    /// for distinct offsets; with smearing they are kept with Gaussian weights.
    bool includes_lower_order = false;
};

/// C_k for k <= 3 at relative offsets x_1..x_{k-1}. Without smearing the
/// offsets must be distinct and nonzero.
CorrelationObservable assemble_C_k(const ModePair& modes, std::vector<double> offsets, double smearing = 0.0);

/// Two-mode part of C_k^2 built from the field-operator expansion: the fully
/// normal-ordered 2k-point term plus every contraction between the two
/// factors. A contraction set whose pairs share one relative shift s yields a
/// lower-order density product; each contraction beyond the first carries
/// delta(0), represented by `contact` (default 1/(2 eps sqrt(pi)) for
/// smearing eps > 0). Without a contact value those singular terms are dropped.
TwoModeOperator second_moment_operator(const CorrelationObservable& obs, const ModePair& modes,
                                       std::optional<double> contact = std::nullopt);

struct Fluctuation {
    double mean = 0.0;
    double variance = 0.0;
    double relative = 0.0;          // delta A / mean
    double relative_squared = 0.0;  // delta A^2 / mean^2
};

/// Ensemble average and variance Tr(rho_n Q) - Tr(rho_n A)^2 with Q the
/// second-moment operator. When Q omits the delta(0) contact terms the result
/// is the finite part of the variance and may be negative.
Fluctuation exact_fluctuation(const CorrelationObservable& obs, const TwoModeOperator& second_moment,
                              const SystemParams& params);
Fluctuation exact_fluctuation(const TwoModeOperator& op, const TwoModeOperator& second_moment,
                              const SystemParams& params);
/// Variance of the two-mode projection only: Tr(rho_n A^2) - Tr(rho_n A)^2
/// with A^2 the matrix square.
Fluctuation projected_fluctuation(const CorrelationObservable& obs, const SystemParams& params);

/// (N^2 / 4) sum_m int dr F_m(r, r + x), the leading ensemble mean of C_2.
double mean_C2_leading(const ModePair& modes, double x, long particles);

/// rho(x) = 2 A cos^2(k0 x + phi) on the unit interval with A fixed by int rho = N.
struct ClassicalPattern {
    long particles = 0;
    double wavenumber = 0.0;
    double phase = 0.0;

    double density(double x) const;
    /// int_0^1 dr rho(r) rho(r + x) by the periodic trapezoid rule on `points` nodes.
    double autocorrelation(double x, std::size_t points = 4096) const;
};

struct CorrelationPoint {
    double x = 0.0;
    double exact_trace = 0.0;  // Tr(rho_n C_2(x))
    double leading = 0.0;      // mean_C2_leading
};

std::vector<CorrelationPoint> correlation_curve(const ModePair& modes, std::span<const double> xs,
                                                const SystemParams& params);
/// CSV with a schema comment line and the header x,exact_trace,leading_formula.
void write_correlation_csv(std::ostream& out, std::span<const CorrelationPoint> curve);

}  // namespace twomode

#pragma once

// Typicality of k-particle observables: kernel-weighted overlap integrals of
// symmetrized products, the leading variance coefficients built from them,
// and the resulting fluctuation regimes.

#include "twomode/modes.hpp"
#include "twomode/poly.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace twomode {

/// Kernel prod_i delta(r_{i+1} - r_i - x_i): the leading term of the
/// integrated density correlation with relative offsets x_1..x_{k-1}.
struct DeltaComb {
    std::vector<double> offsets;
    double smearing = 0.0;  // Gaussian width applied to every offset; 0 = off
};

/// Kernel tabulated on the uniform periodic grid (j/G)^k, row-major with the
/// first coordinate slowest.
struct GridKernel {
    int order = 1;
    std::size_t grid = 0;
    std::vector<double> values;
};

class KernelSpec {
public:
    using Variant = std::variant<DeltaComb, GridKernel>;

    /// Offsets must be pairwise distinct and nonzero unless smearing > 0.
    static KernelSpec delta_comb(std::vector<double> offsets, double smearing = 0.0);
    static KernelSpec grid(int order, std::size_t grid, std::vector<double> values);

    int order() const;
    const Variant& variant() const { return variant_; }
    std::string describe() const;

private:
    explicit KernelSpec(Variant v) : variant_(std::move(v)) {}
    Variant variant_;
};

/// I_{m,m'} for 0 <= m, m' <= k, Hermitian by construction.
class ITable {
public:
    explicit ITable(int order) : order_(order), data_((order + 1) * (order + 1)) {}
    int order() const { return order_; }
    cplx operator()(int m, int mp) const { return data_[m * (order_ + 1) + mp]; }
    cplx& at(int m, int mp) { return data_[m * (order_ + 1) + mp]; }
    /// sum_m |I_{m,m}|^2
    double diagonal_scale() const;
    double max_off_diagonal() const;

private:
    int order_;
    std::vector<cplx> data_;
};

/// Periodic trapezoid refinement: doubling until the table changes by less
/// than this fraction of its scale, or the point cap is reached.
inline constexpr double kQuadratureTolerance = 1e-10;
inline constexpr std::size_t kQuadratureMaxPoints = std::size_t{1} << 20;
inline constexpr double kTypicalityTolerance = 1e-10;

/// Raised when quadrature refinement hits the point cap without converging.
class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ITable integral_table(const KernelSpec& kernel, const ModePair& modes);
/// Same table by quadrature only, bypassing plane-wave closed forms.
ITable integral_table_quadrature(const KernelSpec& kernel, const ModePair& modes);
cplx integral_I(const KernelSpec& kernel, const ModePair& modes, int m, int mp);

/// int dr (Phi_{m'}^* Phi_m)(r, r + x_1, ..) for any offsets, coincident ones
/// included: normal-ordered products are regular at coincident points.
ITable density_product_table(const ModePair& modes, std::span<const double> offsets);

/// J = sum_m (k - 2m) I_{m,m}, paired so that exchange-symmetric tables give 0 exactly.
double integral_J(const ITable& table);
double integral_J(const KernelSpec& kernel, const ModePair& modes);

/// Coefficient of (N/2)^{2k} in the leading variance.
double coefficient_D_2k0(const ITable& table);
/// Coefficient of (N/2)^{2k-2} n^2 in the leading variance.
double coefficient_D_2k2(const ITable& table);

/// Leading part of the ensemble variance as an exact polynomial in (N, n):
///   sum_M Gbar_{2k,M} sum_{m,m'} I_{M-m,M-m'} I_{m,m'} - (sum_m Gbar_{k,m} I_{m,m})^2
/// with the I values converted exactly to rationals. Requires k <= 3.
/// Throws ConsistencyError if its (2k,0) or (2k-2,2) coefficients disagree
/// with coefficient_D_2k0 / coefficient_D_2k2 beyond 1e-8 of the scale.
BivariatePoly variance_polynomial(const ITable& table);
BivariatePoly variance_polynomial(const KernelSpec& kernel, const ModePair& modes);

enum class Verdict { Typical, NotTypical };

struct TypicalityReport {
    int order = 0;
    std::string kernel;
    std::string mode_variant;
    ITable table{0};
    double J = 0.0;
    double D_2k0 = 0.0;
    double D_2k2 = 0.0;
    double scale = 0.0;      // sum_m |I_{m,m}|^2
    double tolerance = kTypicalityTolerance;
    Verdict verdict = Verdict::NotTypical;
    bool subleading_vanishes = false;  // |D_2k2| below the same scaled tolerance
    std::optional<double> suppression_exponent;  // (z0 F''_ab)^2 for separated packets

    nlohmann::json to_json() const;
};

/// For far-field Gaussian modes the exact-zero tolerance is relaxed to the
/// suppression scale exp(-(z0 F''_ab)^2) of the initial packets.
TypicalityReport analyze(const KernelSpec& kernel, const ModePair& modes);
TypicalityReport analyze(const ITable& table, std::string kernel_name, std::string mode_variant);

struct ScalingPrediction {
    double relfluct_exponent;  // delta A / Abar ~ N^e
    double relvar_exponent;    // delta A^2 / Abar^2 ~ N^(2e)
    bool ensemble_dependent;   // dominated by the n-dependent part
    double crossover_alpha;    // 1/2 generically, 3/4 when D_{2k-2,2} = 0
};

/// n = O(N^alpha). Throws std::domain_error when the report is not typical.
ScalingPrediction classify_regime(const TypicalityReport& report, double alpha);

}  // namespace twomode

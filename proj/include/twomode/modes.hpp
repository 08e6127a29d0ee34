#pragma once

// Single-particle mode pairs (psi_a, psi_b) and the symmetrized k-body
// products built from them.
//
// Normalization of Phi_m: we use the subset sum
//   Phi_m(r_1..r_k) = sum over m-subsets S of {1..k} of
//                     prod_{i in S} psi_a(r_i) prod_{i not in S} psi_b(r_i),
// i.e. the raw permutation sum divided by m!(k-m)!. With this choice
//   Phi_M(r_1..r_2k) = sum_m Phi_{M-m}(r_1..r_k) Phi_m(r_k+1..r_2k)
// holds exactly, and F_m = |Phi_m|^2 is the weight of the falling-factorial
// moment N_a^(m) N_b^(k-m) in the average of the 2k-point function.

#include "twomode/fock.hpp"

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace twomode {

/// Maximum particle order for symmetrized products.
inline constexpr int kMaxOrder = 6;

struct ModeValues {
    cplx a;
    cplx b;
};

/// psi_a = exp(i k0 r), psi_b = exp(-i k0 r) on the periodic unit interval,
/// with k0 = 2 pi q.
struct PlaneWave {
    int harmonic = 1;
    double wavenumber() const;
};

/// Two Gaussian packets psi ~ exp(-(z - c)^2 / (4 width^2)), so that |psi|^2
/// has standard deviation `width`, centered at
/// center_a, center_b, in the far-field asymptotic form after free expansion
/// for time `time` under H0 = -d^2/dz^2.
struct FarFieldGaussian {
    double center_a = 0.0;
    double center_b = 10.0;
    double width = 1.0;
    double time = 50.0;
};

/// Samples on the uniform periodic grid r_j = j / G, trigonometrically
/// interpolated between grid points.
struct Tabulated {
    std::vector<cplx> values_a;
    std::vector<cplx> values_b;
    std::vector<cplx> fourier_a;  // index k + G/2 holds the coefficient of exp(2 pi i k r)
    std::vector<cplx> fourier_b;
};

enum class Domain { PeriodicUnit, RealLine };

class ModePair {
public:
    using Variant = std::variant<PlaneWave, FarFieldGaussian, Tabulated>;

    static ModePair plane_wave(int harmonic = 1);
    static ModePair far_field_gaussian(const FarFieldGaussian& spec);
    /// Validates orthonormality on the grid to 1e-8.
    static ModePair tabulated(std::vector<cplx> values_a, std::vector<cplx> values_b);
    /// Text format: '#' comment lines, then rows "x re_a im_a re_b im_b" with x = j/G.
    static ModePair load_tabulated(const std::string& path);
    void save_tabulated(const std::string& path) const;

    ModeValues operator()(double r) const;
    const Variant& variant() const { return variant_; }
    std::string variant_name() const;
    Domain domain() const;
    /// Integration window for the real line, [0, 1) for periodic modes.
    std::pair<double, double> support() const;
    /// True when |psi_a| = |psi_b| holds identically by construction.
    bool equal_modulus() const;

private:
    explicit ModePair(Variant v) : variant_(std::move(v)) {}
    Variant variant_;
};

/// Phi_m from mode values at the k points (subset-sum normalization).
cplx phi_from_values(std::span<const ModeValues> values, int m);

std::vector<ModeValues> evaluate(const ModePair& modes, std::span<const double> points);

/// Throws std::invalid_argument for m outside [0, k] or k above kMaxOrder.
cplx phi_m(const ModePair& modes, int m, std::span<const double> points);
double f_m(const ModePair& modes, int m, std::span<const double> points);
/// The unnormalized sum over all k! permutations: m!(k-m)! Phi_m.
cplx phi_m_permutation_sum(const ModePair& modes, int m, std::span<const double> points);

/// |Phi_M(2k points) - sum_m Phi_{M-m}(first k) Phi_m(last k)|.
double cluster_decompose_check(const ModePair& modes, int M, std::span<const double> points);

// --- free expansion of Gaussian packets --------------------------------------

struct GaussianWavepackets {
    double center_a = 0.0;
    double center_b = 10.0;
    double width = 1.0;
};

cplx gaussian_initial(double z, double center, double width);
/// Fourier transform  int dz exp(-i k z) psi(z)  of the initial packet.
cplx gaussian_fourier(double k, double center, double width);
/// Exact exp(-i t H0) psi at time t (closed form).
cplx gaussian_evolved(double z, double t, double center, double width);
/// (4 pi i t)^{-1/2} exp(i z^2 / 4t) psi~(z / 2t).
cplx gaussian_far_field(double z, double t, double center, double width);

/// Effective mode pair at time t > 0. Throws for t <= 0 or width <= 0.
ModePair far_field(const GaussianWavepackets& initial, double t);
/// k0(t) = z0 / 4t with z0 = center_b - center_a.
double effective_wavenumber(const FarFieldGaussian& spec);

struct ConvolutionProfile {
    std::vector<double> lags;
    std::vector<double> log_magnitude;  // F_ab
    std::vector<double> phase;          // phi_ab
    double peak = 0.0;                  // z0
    double curvature = 0.0;             // F''_ab(z0)
    double separation_ratio = 0.0;      // z0 / (2 pi / |F''|)
    bool separated = false;             // separation_ratio >= 10
    double suppression_exponent = 0.0;  // (z0 F'')^2
};

/// Convolution int dz' psi_a^*(z') psi_b(z' + z) of two initial packets.
/// Throws std::runtime_error when the magnitude has no interior maximum.
ConvolutionProfile convolution_profile(const GaussianWavepackets& initial);
/// Uses the initial packets of a far-field pair, or the periodic samples of a
/// tabulated pair (lags in [-1/2, 1/2)).
ConvolutionProfile convolution_profile(const ModePair& modes);

}  // namespace twomode

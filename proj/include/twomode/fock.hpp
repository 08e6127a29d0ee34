#pragma once

// Two-mode Fock space of N bosons: |l> = |(N/2 + l)_a, (N/2 - l)_b>.
// Operators are finite sums of normal-ordered monomials
//   c * (a^dag)^p (b^dag)^q a^r b^s
// and are materialized as band matrices on the subspace H_n spanned by
// the n central Fock states |l|, |l| < n/2.

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace twomode {

using cplx = std::complex<double>;

/// Raised when an internal identity (non-negative variance, polynomial vs
/// closed form, ...) is violated beyond its tolerance.
class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Particle number N (even, positive) and subspace dimension n (odd, n <= N+1).
class SystemParams {
public:
    SystemParams(long particles, long dimension);

    long particles() const { return particles_; }
    long dimension() const { return dimension_; }
    long half_width() const { return (dimension_ - 1) / 2; }

    /// Row index of |l> in a band matrix on H_n.
    std::size_t index(long ell) const { return static_cast<std::size_t>(ell + half_width()); }
    long ell(std::size_t index) const { return static_cast<long>(index) - half_width(); }
    bool in_subspace(long ell) const { return ell >= -half_width() && ell <= half_width(); }
    bool in_sector(long ell) const { return 2 * ell >= -particles_ && 2 * ell <= particles_; }

    bool operator==(const SystemParams&) const = default;

private:
    long particles_;
    long dimension_;
};

struct NormalMonomial {
    int p = 0;  // a^dag power
    int q = 0;  // b^dag power
    int r = 0;  // a power
    int s = 0;  // b power
    cplx coeff{1.0, 0.0};

    bool number_conserving() const { return p + q == r + s; }
    /// Change of l produced on a ket.
    int shift() const { return p - r; }
    NormalMonomial adjoint() const { return {r, s, p, q, std::conj(coeff)}; }
};

class TwoModeOperator {
public:
    TwoModeOperator() = default;
    explicit TwoModeOperator(std::vector<NormalMonomial> terms);

    static TwoModeOperator identity();
    static TwoModeOperator number_a();
    static TwoModeOperator number_b();

    const std::vector<NormalMonomial>& terms() const { return terms_; }
    int bandwidth() const;
    bool empty() const { return terms_.empty(); }

    TwoModeOperator& add(const NormalMonomial& term);
    TwoModeOperator operator+(const TwoModeOperator& other) const;
    TwoModeOperator operator*(cplx factor) const;
    TwoModeOperator adjoint() const;

private:
    std::vector<NormalMonomial> terms_;
};

/// :A B: with every creator moved left; within the normal-ordered symbol all
/// mode operators commute, so powers simply add.
TwoModeOperator normal_product(const TwoModeOperator& lhs, const TwoModeOperator& rhs);

/// Square band matrix on H_n, stored row-wise over the diagonals |j - i| <= w.
class BandMatrix {
public:
    BandMatrix(std::size_t dim, int bandwidth);

    std::size_t dim() const { return dim_; }
    int bandwidth() const { return bandwidth_; }

    cplx operator()(std::size_t row, std::size_t col) const;
    cplx& at(std::size_t row, std::size_t col);

    std::vector<cplx> apply(std::span<const cplx> vec) const;
    BandMatrix multiply(const BandMatrix& rhs) const;
    BandMatrix square() const { return multiply(*this); }
    BandMatrix adjoint() const;
    bool is_hermitian(double rel_tol = 1e-12) const;
    double max_abs() const;
    std::vector<std::vector<cplx>> dense() const;

private:
    std::size_t dim_;
    int bandwidth_;
    std::vector<cplx> data_;
};

class StateVector {
public:
    /// Validates the length against params and the unit norm to 1e-12.
    StateVector(SystemParams params, std::vector<cplx> amplitudes);
    static StateVector basis(const SystemParams& params, long ell);

    const SystemParams& params() const { return params_; }
    std::span<const cplx> amplitudes() const { return amplitudes_; }
    cplx amplitude(long ell) const { return amplitudes_[params_.index(ell)]; }

private:
    SystemParams params_;
    std::vector<cplx> amplitudes_;
};

/// <l_bra| mono |l_ket> on the full N-particle sector. Throws
/// std::invalid_argument for a monomial that does not conserve N.
cplx matrix_element(const NormalMonomial& mono, long ell_bra, long ell_ket, const SystemParams& params);

BandMatrix to_band_matrix(const TwoModeOperator& op, const SystemParams& params);

cplx expectation(const BandMatrix& matrix, const StateVector& state);
cplx expectation(const TwoModeOperator& op, const StateVector& state);

/// Tr(rho_n A) with rho_n = P_n / n.
double microcanonical_trace(const BandMatrix& matrix);
double microcanonical_trace(const TwoModeOperator& op, const SystemParams& params);

/// Tr(rho_n A^2) - Tr(rho_n A)^2. Throws ConsistencyError if the result is
/// negative beyond 1e-9 relative to Tr(rho_n A^2).
/// The operator overload keeps intermediate states outside H_n; the matrix
/// overload sees only what the matrix holds: rows of the central block of
/// size `central` against all of its columns.
double ensemble_variance_exact(const BandMatrix& matrix, std::size_t central);
double ensemble_variance_exact(const BandMatrix& matrix);
double ensemble_variance_exact(const TwoModeOperator& op, const SystemParams& params);

}  // namespace twomode

#include "twomode/fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace twomode {

SystemParams::SystemParams(long particles, long dimension)
    : particles_(particles), dimension_(dimension)
{
    if (particles <= 0 || particles % 2 != 0)
        throw std::invalid_argument("particle number N must be even and positive, got " +
                                    std::to_string(particles));
    if (dimension < 1 || dimension % 2 == 0)
        throw std::invalid_argument("subspace dimension n must be odd and positive, got " +
                                    std::to_string(dimension));
    if (dimension > particles + 1)
        throw std::invalid_argument("subspace dimension n = " + std::to_string(dimension) +
                                    " exceeds N + 1 = " + std::to_string(particles + 1));
}

// ---------------------------------------------------------------------------

TwoModeOperator::TwoModeOperator(std::vector<NormalMonomial> terms)
{
    for (const auto& t : terms) add(t);
}

TwoModeOperator TwoModeOperator::identity() { return TwoModeOperator({{0, 0, 0, 0, 1.0}}); }
TwoModeOperator TwoModeOperator::number_a() { return TwoModeOperator({{1, 0, 1, 0, 1.0}}); }
TwoModeOperator TwoModeOperator::number_b() { return TwoModeOperator({{0, 1, 0, 1, 1.0}}); }

int TwoModeOperator::bandwidth() const
{
    int w = 0;
    for (const auto& t : terms_) w = std::max(w, std::abs(t.shift()));
    return w;
}

TwoModeOperator& TwoModeOperator::add(const NormalMonomial& term)
{
    if (term.p < 0 || term.q < 0 || term.r < 0 || term.s < 0)
        throw std::invalid_argument("monomial powers must be non-negative");
    if (!term.number_conserving())
        throw std::invalid_argument("monomial a^dag^" + std::to_string(term.p) + " b^dag^" +
                                    std::to_string(term.q) + " a^" + std::to_string(term.r) +
                                    " b^" + std::to_string(term.s) +
                                    " does not conserve particle number");
    for (auto& t : terms_) {
        if (t.p == term.p && t.q == term.q && t.r == term.r && t.s == term.s) {
            t.coeff += term.coeff;
            return *this;
        }
    }
    terms_.push_back(term);
    return *this;
}

TwoModeOperator TwoModeOperator::operator+(const TwoModeOperator& other) const
{
    TwoModeOperator out = *this;
    for (const auto& t : other.terms_) out.add(t);
    return out;
}

TwoModeOperator TwoModeOperator::operator*(cplx factor) const
{
    TwoModeOperator out = *this;
    for (auto& t : out.terms_) t.coeff *= factor;
    return out;
}

TwoModeOperator TwoModeOperator::adjoint() const
{
    TwoModeOperator out;
    for (const auto& t : terms_) out.add(t.adjoint());
    return out;
}

TwoModeOperator normal_product(const TwoModeOperator& lhs, const TwoModeOperator& rhs)
{
    TwoModeOperator out;
    for (const auto& x : lhs.terms())
        for (const auto& y : rhs.terms())
            out.add({x.p + y.p, x.q + y.q, x.r + y.r, x.s + y.s, x.coeff * y.coeff});
    return out;
}

// ---------------------------------------------------------------------------

BandMatrix::BandMatrix(std::size_t dim, int bandwidth)
    : dim_(dim), bandwidth_(bandwidth), data_(dim * static_cast<std::size_t>(2 * bandwidth + 1))
{
    if (bandwidth < 0) throw std::invalid_argument("negative bandwidth");
}

cplx BandMatrix::operator()(std::size_t row, std::size_t col) const
{
    const long off = static_cast<long>(col) - static_cast<long>(row);
    if (std::labs(off) > bandwidth_) return {};
    return data_[row * (2 * bandwidth_ + 1) + static_cast<std::size_t>(off + bandwidth_)];
}

cplx& BandMatrix::at(std::size_t row, std::size_t col)
{
    const long off = static_cast<long>(col) - static_cast<long>(row);
    if (std::labs(off) > bandwidth_ || row >= dim_ || col >= dim_)
        throw std::out_of_range("band matrix entry outside storage");
    return data_[row * (2 * bandwidth_ + 1) + static_cast<std::size_t>(off + bandwidth_)];
}

std::vector<cplx> BandMatrix::apply(std::span<const cplx> vec) const
{
    if (vec.size() != dim_) throw std::invalid_argument("dimension mismatch in band matrix product");
    std::vector<cplx> out(dim_);
    const long n = static_cast<long>(dim_);
    for (long i = 0; i < n; ++i) {
        cplx acc{};
        const long lo = std::max(0L, i - bandwidth_);
        const long hi = std::min(n - 1, i + bandwidth_);
        for (long j = lo; j <= hi; ++j) acc += (*this)(i, j) * vec[j];
        out[i] = acc;
    }
    return out;
}

BandMatrix BandMatrix::multiply(const BandMatrix& rhs) const
{
    if (rhs.dim_ != dim_) throw std::invalid_argument("dimension mismatch in band matrix product");
    BandMatrix out(dim_, bandwidth_ + rhs.bandwidth_);
    const long n = static_cast<long>(dim_);
    for (long i = 0; i < n; ++i) {
        const long klo = std::max(0L, i - bandwidth_);
        const long khi = std::min(n - 1, i + bandwidth_);
        for (long k = klo; k <= khi; ++k) {
            const cplx left = (*this)(i, k);
            if (left == cplx{}) continue;
            const long jlo = std::max(0L, k - rhs.bandwidth_);
            const long jhi = std::min(n - 1, k + rhs.bandwidth_);
            for (long j = jlo; j <= jhi; ++j) out.at(i, j) += left * rhs(k, j);
        }
    }
    return out;
}

BandMatrix BandMatrix::adjoint() const
{
    BandMatrix out(dim_, bandwidth_);
    const long n = static_cast<long>(dim_);
    for (long i = 0; i < n; ++i)
        for (long j = std::max(0L, i - bandwidth_); j <= std::min(n - 1, i + bandwidth_); ++j)
            out.at(j, i) = std::conj((*this)(i, j));
    return out;
}

double BandMatrix::max_abs() const
{
    double m = 0.0;
    for (const auto& v : data_) m = std::max(m, std::abs(v));
    return m;
}

bool BandMatrix::is_hermitian(double rel_tol) const
{
    const double tol = rel_tol * std::max(1.0, max_abs());
    const long n = static_cast<long>(dim_);
    for (long i = 0; i < n; ++i)
        for (long j = i; j <= std::min(n - 1, i + bandwidth_); ++j)
            if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) return false;
    return true;
}

std::vector<std::vector<cplx>> BandMatrix::dense() const
{
    std::vector<std::vector<cplx>> out(dim_, std::vector<cplx>(dim_));
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = 0; j < dim_; ++j) out[i][j] = (*this)(i, j);
    return out;
}

// ---------------------------------------------------------------------------

StateVector::StateVector(SystemParams params, std::vector<cplx> amplitudes)
    : params_(params), amplitudes_(std::move(amplitudes))
{
    if (amplitudes_.size() != static_cast<std::size_t>(params_.dimension()))
        throw std::invalid_argument("state has " + std::to_string(amplitudes_.size()) +
                                    " amplitudes, subspace dimension is " +
                                    std::to_string(params_.dimension()));
    double norm = 0.0;
    for (const auto& c : amplitudes_) norm += std::norm(c);
    if (std::abs(norm - 1.0) > 1e-12)
        throw std::invalid_argument("state is not normalized (|c|^2 sums to " + std::to_string(norm) + ")");
}

StateVector StateVector::basis(const SystemParams& params, long ell)
{
    if (!params.in_subspace(ell)) throw std::invalid_argument("basis index outside H_n");
    std::vector<cplx> amps(params.dimension());
    amps[params.index(ell)] = 1.0;
    return StateVector(params, std::move(amps));
}

// ---------------------------------------------------------------------------

cplx matrix_element(const NormalMonomial& mono, long ell_bra, long ell_ket, const SystemParams& params)
{
    if (!mono.number_conserving())
        throw std::invalid_argument("matrix element of a non number-conserving monomial");
    if (!params.in_sector(ell_bra) || !params.in_sector(ell_ket))
        throw std::invalid_argument("Fock index outside the N-particle sector");
    if (ell_bra != ell_ket + mono.shift()) return {};

    const long half = params.particles() / 2;
    long na = half + ell_ket;
    long nb = half - ell_ket;
    if (na < mono.r || nb < mono.s) return {};

    // sqrt of falling/rising factorial ratios, accumulated one factor at a time
    double factor = 1.0;
    for (int i = 0; i < mono.s; ++i) factor *= std::sqrt(static_cast<double>(nb - i));
    nb -= mono.s;
    for (int i = 0; i < mono.r; ++i) factor *= std::sqrt(static_cast<double>(na - i));
    na -= mono.r;
    for (int i = 1; i <= mono.p; ++i) factor *= std::sqrt(static_cast<double>(na + i));
    for (int i = 1; i <= mono.q; ++i) factor *= std::sqrt(static_cast<double>(nb + i));
    return mono.coeff * factor;
}

BandMatrix to_band_matrix(const TwoModeOperator& op, const SystemParams& params)
{
    const int w = op.bandwidth();
    BandMatrix out(static_cast<std::size_t>(params.dimension()), w);
    const long h = params.half_width();
    for (const auto& mono : op.terms()) {
        for (long ket = -h; ket <= h; ++ket) {
            const long bra = ket + mono.shift();
            if (!params.in_subspace(bra)) continue;
            out.at(params.index(bra), params.index(ket)) += matrix_element(mono, bra, ket, params);
        }
    }
    for (long i = -h; i <= h; ++i) {
        for (long j = std::max(-h, i - w); j <= std::min(h, i + w); ++j) {
            const cplx v = out(params.index(i), params.index(j));
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw std::overflow_error("band matrix entry (" + std::to_string(i) + ", " +
                                          std::to_string(j) +
                                          ") overflows double precision; rescale the operator "
                                          "coefficients (e.g. divide by a power of N)");
        }
    }
    return out;
}

cplx expectation(const BandMatrix& matrix, const StateVector& state)
{
    const auto amps = state.amplitudes();
    if (matrix.dim() != amps.size())
        throw std::invalid_argument("operator dimension " + std::to_string(matrix.dim()) +
                                    " does not match state dimension " + std::to_string(amps.size()));
    const auto image = matrix.apply(amps);
    cplx acc{};
    for (std::size_t i = 0; i < amps.size(); ++i) acc += std::conj(amps[i]) * image[i];
    return acc;
}

cplx expectation(const TwoModeOperator& op, const StateVector& state)
{
    return expectation(to_band_matrix(op, state.params()), state);
}

double microcanonical_trace(const BandMatrix& matrix)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < matrix.dim(); ++i) acc += matrix(i, i).real();
    return acc / static_cast<double>(matrix.dim());
}

double microcanonical_trace(const TwoModeOperator& op, const SystemParams& params)
{
    return microcanonical_trace(to_band_matrix(op, params));
}

double ensemble_variance_exact(const BandMatrix& matrix, std::size_t central)
{
    const long dim = static_cast<long>(matrix.dim());
    const long n = static_cast<long>(central);
    if (n <= 0 || n > dim || (dim - n) % 2 != 0)
        throw std::invalid_argument("central block of size " + std::to_string(n) +
                                    " does not fit symmetrically in dimension " + std::to_string(dim));
    const long first = (dim - n) / 2;
    const int w = matrix.bandwidth();
    double mean = 0.0;
    for (long i = first; i < first + n; ++i) mean += matrix(i, i).real();
    mean /= static_cast<double>(n);
    double second = 0.0;  // Tr(rho A^2)
    double centered = 0.0;
    if (matrix.is_hermitian()) {
        // (A^2)_ii - mean^2 = sum_{j != i} |A_ij|^2 + (A_ii - mean)^2 + 2 mean (A_ii - mean);
        // the last term sums to zero over i and is dropped.
        for (long i = first; i < first + n; ++i) {
            double off = 0.0;
            for (long j = std::max(0L, i - w); j <= std::min(dim - 1, i + w); ++j)
                if (j != i) off += std::norm(matrix(i, j));
            const double d = matrix(i, i).real();
            centered += off + (d - mean) * (d - mean);
            second += off + d * d;
        }
    } else {
        const BandMatrix sq = matrix.square();
        for (long i = first; i < first + n; ++i) second += sq(i, i).real();
        centered = second - static_cast<double>(n) * mean * mean;
    }
    const double variance = centered / static_cast<double>(n);
    second /= static_cast<double>(n);
    if (variance < -1e-9 * std::max(1.0, second))
        throw ConsistencyError("negative ensemble variance " + std::to_string(variance));
    return variance;
}

double ensemble_variance_exact(const BandMatrix& matrix) { return ensemble_variance_exact(matrix, matrix.dim()); }

double ensemble_variance_exact(const TwoModeOperator& op, const SystemParams& params)
{
    const long padded = std::min(params.dimension() + 2L * op.bandwidth(), params.particles() + 1);
    const SystemParams outer(params.particles(), padded);
    return ensemble_variance_exact(to_band_matrix(op, outer), static_cast<std::size_t>(params.dimension()));
}

}  // namespace twomode

#pragma once

/// @file
/// Dense complex linear algebra at desk scale (dims ≤ ~8): Hermitian
/// eigendecomposition via cyclic Jacobi rotations, operator norms, validated
/// projection / effect / state types, spectral thresholding, and lattice
/// meet/join of closed subspaces.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace anchorlab {

using cplx = std::complex<double>;

/// Thrown when a documented operation precondition is violated. The message
/// names the offending quantity (e.g. the failing commutator) so callers can
/// surface a refusal diagnostic instead of a bare assertion.
struct precondition_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Default tolerance for algebraic identities (self-adjointness, idempotency,
/// commutation). Random-unitary constructions at these dims land near 1e-14,
/// leaving ~4 orders of headroom.
inline constexpr double kAlgebraTol = 1e-10;
/// Valuation membership test ‖Eψ − ψ‖ ≤ tol.
inline constexpr double kMembershipTol = 1e-9;
/// Eigenvalues within this distance below a spectral threshold τ still count
/// as crossing it (closed-at-τ tie break).
inline constexpr double kEigTieTol = 1e-9;
/// Jacobi sweep stop: off-diagonal Frobenius mass below this.
inline constexpr double kJacobiOffTol = 1e-12;
/// Meet extraction keeps eigenvectors of E + F with eigenvalue ≥ 2 − cutoff
/// (exactly-2 means "fixed by both"; the slack absorbs Jacobi rounding).
inline constexpr double kMeetEigCutoff = 1e-8;

// ---------------------------------------------------------------------------
// ComplexMatrix
// ---------------------------------------------------------------------------

/// Square complex matrix, row-major, value semantics. Deliberately minimal:
/// only what the logic/operator layers need.
class ComplexMatrix {
  public:
    ComplexMatrix() = default;
    explicit ComplexMatrix(std::size_t n) : n_(n), a_(n * n, cplx{0.0, 0.0}) {}

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1.0;
        return m;
    }
    static ComplexMatrix zero(std::size_t n) { return ComplexMatrix(n); }
    static ComplexMatrix diagonal(const std::vector<double> &d) {
        ComplexMatrix m(d.size());
        for (std::size_t i = 0; i < d.size(); ++i)
            m(i, i) = d[i];
        return m;
    }
    static ComplexMatrix diagonal(const std::vector<cplx> &d) {
        ComplexMatrix m(d.size());
        for (std::size_t i = 0; i < d.size(); ++i)
            m(i, i) = d[i];
        return m;
    }
    /// Row-major initializer, e.g. from_rows({{1,0},{0,1}}).
    static ComplexMatrix from_rows(const std::vector<std::vector<cplx>> &rows) {
        ComplexMatrix m(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != rows.size())
                throw precondition_error("from_rows: matrix must be square");
            for (std::size_t j = 0; j < rows.size(); ++j)
                m(i, j) = rows[i][j];
        }
        return m;
    }

    [[nodiscard]] std::size_t dim() const { return n_; }
    cplx &operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
    const cplx &operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

    ComplexMatrix &operator+=(const ComplexMatrix &o) {
        check_same_dim(o, "operator+=");
        for (std::size_t k = 0; k < a_.size(); ++k)
            a_[k] += o.a_[k];
        return *this;
    }
    ComplexMatrix &operator-=(const ComplexMatrix &o) {
        check_same_dim(o, "operator-=");
        for (std::size_t k = 0; k < a_.size(); ++k)
            a_[k] -= o.a_[k];
        return *this;
    }
    ComplexMatrix &operator*=(cplx s) {
        for (auto &v : a_)
            v *= s;
        return *this;
    }
    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix &b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix &b) { return a -= b; }
    friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }

    friend ComplexMatrix operator*(const ComplexMatrix &a, const ComplexMatrix &b) {
        a.check_same_dim(b, "operator*");
        const std::size_t n = a.n_;
        ComplexMatrix c(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) {
                const cplx aik = a(i, k);
                if (aik == cplx{0.0, 0.0})
                    continue;
                for (std::size_t j = 0; j < n; ++j)
                    c(i, j) += aik * b(k, j);
            }
        return c;
    }

    [[nodiscard]] ComplexMatrix adjoint() const {
        ComplexMatrix m(n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                m(j, i) = std::conj((*this)(i, j));
        return m;
    }

    [[nodiscard]] std::vector<cplx> apply(const std::vector<cplx> &x) const {
        if (x.size() != n_)
            throw precondition_error("matrix-vector apply: dimension mismatch");
        std::vector<cplx> y(n_, cplx{0.0, 0.0});
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                y[i] += (*this)(i, j) * x[j];
        return y;
    }

    [[nodiscard]] double max_abs_entry() const {
        double m = 0.0;
        for (const auto &v : a_)
            m = std::max(m, std::abs(v));
        return m;
    }
    [[nodiscard]] double frobenius_norm() const {
        double s = 0.0;
        for (const auto &v : a_)
            s += std::norm(v);
        return std::sqrt(s);
    }
    [[nodiscard]] bool is_hermitian(double tol = kAlgebraTol) const {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i; j < n_; ++j)
                if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol)
                    return false;
        return true;
    }

  private:
    void check_same_dim(const ComplexMatrix &o, const char *op) const {
        if (n_ != o.n_)
            throw precondition_error(std::string(op) + ": dimension mismatch (" +
                                     std::to_string(n_) + " vs " + std::to_string(o.n_) + ")");
    }
    std::size_t n_ = 0;
    std::vector<cplx> a_;
};

/// Entrywise max |A − B|.
inline double max_abs_diff(const ComplexMatrix &a, const ComplexMatrix &b) {
    if (a.dim() != b.dim())
        throw precondition_error("max_abs_diff: dimension mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < a.dim(); ++j)
            m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

/// [X, Y] = XY − YX. Dimension mismatch throws.
inline ComplexMatrix commutator(const ComplexMatrix &x, const ComplexMatrix &y) {
    if (x.dim() != y.dim())
        throw precondition_error("commutator: dimension mismatch (" + std::to_string(x.dim()) +
                                 " vs " + std::to_string(y.dim()) + ")");
    return x * y - y * x;
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition (cyclic Jacobi)
// ---------------------------------------------------------------------------

/// Eigenvalues (descending) with matching orthonormal eigenvector columns.
struct HermitianEigen {
    std::vector<double> values;
    ComplexMatrix vectors; ///< column j is the eigenvector for values[j]

    [[nodiscard]] std::vector<cplx> vector(std::size_t j) const {
        std::vector<cplx> v(vectors.dim());
        for (std::size_t i = 0; i < vectors.dim(); ++i)
            v[i] = vectors(i, j);
        return v;
    }
};

namespace detail {

inline double off_diagonal_frobenius(const ComplexMatrix &b) {
    double s = 0.0;
    for (std::size_t i = 0; i < b.dim(); ++i)
        for (std::size_t j = 0; j < b.dim(); ++j)
            if (i != j)
                s += std::norm(b(i, j));
    return std::sqrt(s);
}

} // namespace detail

/// Cyclic Jacobi driver. Sweeps 2x2 unitary rotations over all (p, q) pairs
/// until the off-diagonal Frobenius mass drops below `off_tol`. Robust and
/// dependency-free at these dims; cost is irrelevant at n ≤ 8.
/// Throws precondition_error for non-Hermitian input (checked at 1e-9).
inline HermitianEigen hermitian_eigendecomposition(const ComplexMatrix &a,
                                                   double off_tol = kJacobiOffTol) {
    if (!a.is_hermitian(1e-9))
        throw precondition_error("hermitian_eigendecomposition: input is not Hermitian "
                                 "(max asymmetry above 1e-9)");
    const std::size_t n = a.dim();
    ComplexMatrix b = a;
    ComplexMatrix v = ComplexMatrix::identity(n);
    // Scale-aware stop: absolute tolerance, but never demand more than ~1e-15
    // relative resolution of the matrix itself.
    const double stop = std::max(off_tol, 1e-15 * std::max(1.0, b.frobenius_norm()));

    const int max_sweeps = 80;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (detail::off_diagonal_frobenius(b) < stop)
            break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const cplx gpq = b(p, q);
                const double g = std::abs(gpq);
                if (g <= stop / (n * n))
                    continue;
                // Phase-reduce the pivot to a real symmetric 2x2, then apply
                // the classical stable rotation angle.
                const double phi = std::arg(gpq);
                const double alpha = b(p, p).real();
                const double beta = b(q, q).real();
                const double theta = (alpha - beta) / (2.0 * g);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const cplx eip = std::polar(1.0, phi / 2.0);
                const cplx ein = std::conj(eip);
                // Column rotation U: identity except
                //   U(p,p)=c*eip  U(p,q)=-s*eip
                //   U(q,p)=s*ein  U(q,q)= c*ein
                // b <- U* b U, v <- v U.
                for (std::size_t i = 0; i < n; ++i) {
                    const cplx bip = b(i, p), biq = b(i, q);
                    b(i, p) = bip * (c * eip) + biq * (s * ein);
                    b(i, q) = bip * (-s * eip) + biq * (c * ein);
                }
                for (std::size_t j = 0; j < n; ++j) {
                    const cplx bpj = b(p, j), bqj = b(q, j);
                    b(p, j) = std::conj(c * eip) * bpj + std::conj(s * ein) * bqj;
                    b(q, j) = std::conj(-s * eip) * bpj + std::conj(c * ein) * bqj;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const cplx vip = v(i, p), viq = v(i, q);
                    v(i, p) = vip * (c * eip) + viq * (s * ein);
                    v(i, q) = vip * (-s * eip) + viq * (c * ein);
                }
            }
        }
    }
    if (detail::off_diagonal_frobenius(b) >= std::max(stop * 10.0, 1e-10))
        throw std::runtime_error("hermitian_eigendecomposition: Jacobi sweeps did not converge");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return b(i, i).real() > b(j, j).real(); });

    HermitianEigen out;
    out.values.resize(n);
    out.vectors = ComplexMatrix(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = b(order[j], order[j]).real();
        for (std::size_t i = 0; i < n; ++i)
            out.vectors(i, j) = v(i, order[j]);
    }
    return out;
}

/// Largest singular value, computed as sqrt(λ_max(A*A)); A*A is Hermitian PSD
/// so the Jacobi path applies. Relative accuracy tracks the Jacobi stop.
inline double operator_norm(const ComplexMatrix &a) {
    if (a.dim() == 0)
        return 0.0;
    const ComplexMatrix gram = a.adjoint() * a;
    const HermitianEigen eig = hermitian_eigendecomposition(gram);
    return std::sqrt(std::max(0.0, eig.values.front()));
}

// ---------------------------------------------------------------------------
// Vector helpers (complex)
// ---------------------------------------------------------------------------

namespace detail {

inline cplx inner(const std::vector<cplx> &x, const std::vector<cplx> &y) {
    cplx s{0.0, 0.0};
    for (std::size_t i = 0; i < x.size(); ++i)
        s += std::conj(x[i]) * y[i];
    return s;
}

inline double norm2(const std::vector<cplx> &x) {
    double s = 0.0;
    for (const auto &v : x)
        s += std::norm(v);
    return std::sqrt(s);
}

/// Modified Gram-Schmidt with one re-orthogonalization pass; vectors with
/// residual below `drop_tol` (relative to the input scale) are dropped.
inline std::vector<std::vector<cplx>> orthonormalize(const std::vector<std::vector<cplx>> &vs,
                                                     double drop_tol = 1e-12) {
    std::vector<std::vector<cplx>> basis;
    for (auto v : vs) {
        const double scale = std::max(1.0, norm2(v));
        for (int pass = 0; pass < 2; ++pass)
            for (const auto &u : basis) {
                const cplx c = inner(u, v);
                for (std::size_t i = 0; i < v.size(); ++i)
                    v[i] -= c * u[i];
            }
        const double r = norm2(v);
        if (r > drop_tol * scale) {
            for (auto &e : v)
                e /= r;
            basis.push_back(std::move(v));
        }
    }
    return basis;
}

/// Sum of outer products Σ u u* over an orthonormal family.
inline ComplexMatrix projector_from_basis(std::size_t n, const std::vector<std::vector<cplx>> &basis) {
    ComplexMatrix p(n);
    for (const auto &u : basis)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                p(i, j) += u[i] * std::conj(u[j]);
    return p;
}

/// Rotates a complex vector by a global unit phase so its largest-magnitude
/// entry becomes real positive, then extracts the real parts. nullopt when the
/// vector is (numerically) zero or genuinely not real-up-to-phase: residual
/// imaginary mass above `imag_tol` relative to the vector scale. Eigenvectors
/// of real symmetric matrices are only real up to such a phase, so this is the
/// correct way to realify them.
inline std::optional<std::vector<double>> realify_phase(std::vector<cplx> v,
                                                        double imag_tol = 1e-9) {
    std::size_t k = 0;
    double best = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (std::abs(v[i]) > best) {
            best = std::abs(v[i]);
            k = i;
        }
    if (best <= 0.0)
        return std::nullopt;
    const cplx phase = v[k] / best;
    double imag_mass = 0.0;
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const cplx w = v[i] * std::conj(phase);
        imag_mass = std::max(imag_mass, std::abs(w.imag()));
        out[i] = w.real();
    }
    if (imag_mass > imag_tol * std::max(1.0, best))
        return std::nullopt;
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Validated operator types
// ---------------------------------------------------------------------------

/// Orthogonal projection: E = E* = E², validated at construction.
class ProjectionOp {
  public:
    explicit ProjectionOp(ComplexMatrix m, double tol = kAlgebraTol) : m_(std::move(m)), tol_(tol) {
        if (!m_.is_hermitian(tol_))
            throw precondition_error("ProjectionOp: matrix is not self-adjoint within tol");
        if (max_abs_diff(m_ * m_, m_) > tol_)
            throw precondition_error("ProjectionOp: matrix is not idempotent within tol");
    }

    static ProjectionOp identity(std::size_t n) { return ProjectionOp(ComplexMatrix::identity(n)); }
    static ProjectionOp zero(std::size_t n) { return ProjectionOp(ComplexMatrix::zero(n)); }
    /// Projection onto coordinates with pattern bit 1.
    static ProjectionOp diagonal(const std::vector<int> &bits) {
        ComplexMatrix m(bits.size());
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (bits[i] != 0 && bits[i] != 1)
                throw precondition_error("ProjectionOp::diagonal: pattern entries must be 0/1");
            m(i, i) = bits[i];
        }
        return ProjectionOp(std::move(m));
    }
    /// Projection onto the span of the given vectors (orthonormalized; near-
    /// dependent vectors are dropped).
    static ProjectionOp span(std::size_t n, const std::vector<std::vector<cplx>> &vectors) {
        for (const auto &v : vectors)
            if (v.size() != n)
                throw precondition_error("ProjectionOp::span: vector dimension mismatch");
        return ProjectionOp(detail::projector_from_basis(n, detail::orthonormalize(vectors)));
    }
    static ProjectionOp rank_one(const std::vector<cplx> &v) {
        ProjectionOp p = span(v.size(), {v});
        if (p.rank() != 1) // a numerically zero direction would silently span {0}
            throw precondition_error("ProjectionOp::rank_one: direction vector is zero");
        return p;
    }

    [[nodiscard]] const ComplexMatrix &matrix() const { return m_; }
    [[nodiscard]] std::size_t dim() const { return m_.dim(); }
    [[nodiscard]] double tol() const { return tol_; }
    /// trace(E) rounded — the subspace dimension.
    [[nodiscard]] std::size_t rank() const {
        double t = 0.0;
        for (std::size_t i = 0; i < dim(); ++i)
            t += m_(i, i).real();
        return static_cast<std::size_t>(std::llround(t));
    }
    [[nodiscard]] ProjectionOp complement() const {
        return ProjectionOp(ComplexMatrix::identity(dim()) - m_, tol_);
    }

  private:
    ComplexMatrix m_;
    double tol_;
};

/// Order test for projections: E ≤ F iff EF = E (range inclusion), checked in
/// operator norm.
inline bool projection_leq(const ProjectionOp &e, const ProjectionOp &f, double tol = kAlgebraTol) {
    if (e.dim() != f.dim())
        throw precondition_error("projection_leq: dimension mismatch");
    return operator_norm(e.matrix() * f.matrix() - e.matrix()) <= tol;
}

/// Effect: self-adjoint with spectrum in [0, 1] (within tol), validated at
/// construction via eigendecomposition.
class EffectOp {
  public:
    explicit EffectOp(ComplexMatrix m, double tol = kAlgebraTol) : m_(std::move(m)), tol_(tol) {
        if (!m_.is_hermitian(tol_))
            throw precondition_error("EffectOp: matrix is not self-adjoint within tol");
        const auto eig = hermitian_eigendecomposition(m_);
        for (double v : eig.values)
            if (v < -tol_ || v > 1.0 + tol_)
                throw precondition_error("EffectOp: spectrum leaves [0,1] (eigenvalue " +
                                         std::to_string(v) + ")");
    }
    static EffectOp diagonal(const std::vector<double> &d) {
        return EffectOp(ComplexMatrix::diagonal(d));
    }
    [[nodiscard]] const ComplexMatrix &matrix() const { return m_; }
    [[nodiscard]] std::size_t dim() const { return m_.dim(); }

  private:
    ComplexMatrix m_;
    double tol_;
};

/// Unit vector in C^n (norm within tol of 1). Global phase is irrelevant to
/// every consumer.
class StateVector {
  public:
    explicit StateVector(std::vector<cplx> v, double norm_tol = kAlgebraTol) : v_(std::move(v)) {
        if (v_.empty())
            throw precondition_error("StateVector: empty vector");
        if (std::abs(detail::norm2(v_) - 1.0) > norm_tol)
            throw precondition_error("StateVector: vector is not unit norm within tol");
    }
    static StateVector basis(std::size_t n, std::size_t i) {
        if (i >= n)
            throw precondition_error("StateVector::basis: index out of range");
        std::vector<cplx> v(n, cplx{0.0, 0.0});
        v[i] = 1.0;
        return StateVector(std::move(v));
    }
    /// Normalizes a nonzero vector.
    static StateVector normalized(std::vector<cplx> v) {
        const double r = detail::norm2(v);
        if (r < 1e-300)
            throw precondition_error("StateVector::normalized: zero vector");
        for (auto &e : v)
            e /= r;
        return StateVector(std::move(v));
    }
    [[nodiscard]] const std::vector<cplx> &entries() const { return v_; }
    [[nodiscard]] std::size_t dim() const { return v_.size(); }

  private:
    std::vector<cplx> v_;
};

// ---------------------------------------------------------------------------
// Spectral threshold and subspace lattice
// ---------------------------------------------------------------------------

/// P_{A,τ}: spectral projection of the effect A onto eigenvalues ≥ τ.
/// Eigenvalues within `tie_tol` below τ are included (closed-at-τ tie break).
inline ProjectionOp spectral_threshold_projection(const EffectOp &a, double tau,
                                                  double tie_tol = kEigTieTol) {
    if (!(tau >= 0.0 && tau <= 1.0))
        throw precondition_error("spectral_threshold_projection: tau must lie in [0,1]");
    const auto eig = hermitian_eigendecomposition(a.matrix());
    std::vector<std::vector<cplx>> keep;
    for (std::size_t j = 0; j < eig.values.size(); ++j)
        if (eig.values[j] >= tau - tie_tol)
            keep.push_back(eig.vector(j));
    // Eigenvector columns are already orthonormal; build the projector directly.
    return ProjectionOp(detail::projector_from_basis(a.dim(), keep));
}

/// Meet (intersection of ranges): orthonormal basis of null(2I − E − F),
/// i.e. the eigenvectors of E + F with eigenvalue 2 — exactly the vectors
/// fixed by both projections. Correct for non-commuting pairs.
inline ProjectionOp subspace_meet(const ProjectionOp &e, const ProjectionOp &f) {
    if (e.dim() != f.dim())
        throw precondition_error("subspace_meet: dimension mismatch");
    const auto eig = hermitian_eigendecomposition(e.matrix() + f.matrix());
    std::vector<std::vector<cplx>> keep;
    for (std::size_t j = 0; j < eig.values.size(); ++j)
        if (eig.values[j] >= 2.0 - kMeetEigCutoff)
            keep.push_back(eig.vector(j));
    return ProjectionOp(detail::projector_from_basis(e.dim(), keep));
}

/// Join (closed span of ranges) via the De Morgan dual of the meet.
inline ProjectionOp subspace_join(const ProjectionOp &e, const ProjectionOp &f) {
    if (e.dim() != f.dim())
        throw precondition_error("subspace_join: dimension mismatch");
    return subspace_meet(e.complement(), f.complement()).complement();
}

} // namespace anchorlab

#pragma once

/// @file
/// Symbolic nonexpansive-operator zoo on R^n: rotations, scalings, affine
/// maps, metric projections (halfspace / box / ball / affine set), the
/// ℓ1 shrinkage prox, resolvents of linear PSD operators, averaged maps,
/// compositions, and an escape-hatch black-box kind. Every operator carries
/// an auditable certified Lipschitz upper bound; empirical lower bounds are a
/// separate, never-conflated operation.

#include <anchorlab/linalg.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace anchorlab {

using Vec = std::vector<double>;

inline double vec_norm(const Vec &x) {
    double s = 0.0;
    for (double v : x)
        s += v * v;
    return std::sqrt(s);
}
inline double vec_dist(const Vec &x, const Vec &y) {
    if (x.size() != y.size())
        throw precondition_error("vec_dist: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        s += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(s);
}
inline double vec_dot(const Vec &x, const Vec &y) {
    if (x.size() != y.size())
        throw precondition_error("vec_dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        s += x[i] * y[i];
    return s;
}

/// Dense square real matrix, row-major. Thin: only what the operator layer
/// needs; spectral quantities bridge to the complex Jacobi machinery.
struct RealMatrix {
    std::size_t n = 0;
    std::vector<double> a; // row-major n*n

    RealMatrix() = default;
    explicit RealMatrix(std::size_t dim) : n(dim), a(dim * dim, 0.0) {}
    static RealMatrix identity(std::size_t dim) {
        RealMatrix m(dim);
        for (std::size_t i = 0; i < dim; ++i)
            m(i, i) = 1.0;
        return m;
    }
    static RealMatrix from_rows(const std::vector<std::vector<double>> &rows) {
        RealMatrix m(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != rows.size())
                throw precondition_error("RealMatrix::from_rows: matrix must be square");
            for (std::size_t j = 0; j < rows.size(); ++j)
                m(i, j) = rows[i][j];
        }
        return m;
    }

    double &operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
    const double &operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }

    [[nodiscard]] Vec apply(const Vec &x) const {
        if (x.size() != n)
            throw precondition_error("RealMatrix::apply: dimension mismatch");
        Vec y(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                y[i] += (*this)(i, j) * x[j];
        return y;
    }
    friend RealMatrix operator*(const RealMatrix &x, const RealMatrix &y) {
        if (x.n != y.n)
            throw precondition_error("RealMatrix multiply: dimension mismatch");
        RealMatrix c(x.n);
        for (std::size_t i = 0; i < x.n; ++i)
            for (std::size_t k = 0; k < x.n; ++k) {
                const double v = x(i, k);
                if (v == 0.0)
                    continue;
                for (std::size_t j = 0; j < x.n; ++j)
                    c(i, j) += v * y(k, j);
            }
        return c;
    }
    friend RealMatrix operator-(const RealMatrix &x, const RealMatrix &y) {
        if (x.n != y.n)
            throw precondition_error("RealMatrix subtract: dimension mismatch");
        RealMatrix c(x.n);
        for (std::size_t k = 0; k < x.a.size(); ++k)
            c.a[k] = x.a[k] - y.a[k];
        return c;
    }
    [[nodiscard]] RealMatrix transpose() const {
        RealMatrix t(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                t(j, i) = (*this)(i, j);
        return t;
    }
    [[nodiscard]] ComplexMatrix to_complex() const {
        ComplexMatrix m(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                m(i, j) = (*this)(i, j);
        return m;
    }
    /// Largest singular value.
    [[nodiscard]] double spectral_norm() const { return operator_norm(to_complex()); }
    [[nodiscard]] bool is_symmetric(double tol = 1e-9) const {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (std::abs((*this)(i, j) - (*this)(j, i)) > tol)
                    return false;
        return true;
    }
};

/// Gaussian elimination with partial pivoting. nullopt when the system is
/// singular at the pivot tolerance (relative to the matrix scale).
inline std::optional<Vec> solve_linear(RealMatrix m, Vec rhs, double pivot_tol = 1e-12) {
    const std::size_t n = m.n;
    if (rhs.size() != n)
        throw precondition_error("solve_linear: dimension mismatch");
    double scale = 0.0;
    for (double v : m.a)
        scale = std::max(scale, std::abs(v));
    scale = std::max(scale, 1.0);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(m(r, col)) > std::abs(m(piv, col)))
                piv = r;
        if (std::abs(m(piv, col)) <= pivot_tol * scale)
            return std::nullopt;
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j)
                std::swap(m(col, j), m(piv, j));
            std::swap(rhs[col], rhs[piv]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = m(r, col) / m(col, col);
            if (f == 0.0)
                continue;
            for (std::size_t j = col; j < n; ++j)
                m(r, j) -= f * m(col, j);
            rhs[r] -= f * rhs[col];
        }
    }
    Vec x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = rhs[i];
        for (std::size_t j = i + 1; j < n; ++j)
            s -= m(i, j) * x[j];
        x[i] = s / m(i, i);
    }
    return x;
}

/// Affine normal form T(x) = A x + b, available for the linear-representable
/// kinds; enables exact spectral certificates.
struct AffineForm {
    RealMatrix A;
    Vec b;
};

/// Declared fixed-point structure, used to derive common fixed points.
struct FixedPointSet {
    enum class Kind { Unknown, WholeSpace, Point, AffineSet, ConvexSet };
    Kind kind = Kind::Unknown;
    Vec point;                  ///< Point: the point; AffineSet: a member point
    std::vector<Vec> basis;     ///< AffineSet: orthonormal direction basis
    std::string description;
};

namespace detail {

/// Gram-Schmidt for real vectors (two passes), dropping near-dependent input.
inline std::vector<Vec> orthonormalize_real(const std::vector<Vec> &vs, double drop_tol = 1e-12) {
    std::vector<Vec> basis;
    for (Vec v : vs) {
        const double scale = std::max(1.0, vec_norm(v));
        for (int pass = 0; pass < 2; ++pass)
            for (const auto &u : basis) {
                const double c = vec_dot(u, v);
                for (std::size_t i = 0; i < v.size(); ++i)
                    v[i] -= c * u[i];
            }
        const double r = vec_norm(v);
        if (r > drop_tol * scale) {
            for (auto &e : v)
                e /= r;
            basis.push_back(std::move(v));
        }
    }
    return basis;
}

inline Vec project_affine_set(const Vec &x, const Vec &point, const std::vector<Vec> &basis) {
    Vec y = point;
    for (const auto &u : basis) {
        double c = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            c += u[i] * (x[i] - point[i]);
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] += c * u[i];
    }
    return y;
}

} // namespace detail

// ---------------------------------------------------------------------------
// OperatorMap
// ---------------------------------------------------------------------------

/// A symbolically-specified map on R^n. Operators are never opaque callables
/// except for the explicit BlackBox kind, which carries an infinite certified
/// bound unless the caller asserts one (the assertion is visible in the
/// descriptor).
class OperatorMap {
    struct Rotation {
        double angle;
    };
    struct Scaling {
        std::size_t dim;
        double alpha;
    };
    struct Affine {
        RealMatrix A;
        Vec b;
    };
    struct HalfspaceProj { // {x : <a,x> <= beta}
        Vec a;
        double beta;
    };
    struct BoxProj {
        Vec lo, hi;
    };
    struct BallProj {
        Vec center;
        double radius;
    };
    struct AffineSetProj {
        Vec point;
        std::vector<Vec> basis; // orthonormal directions
    };
    struct SoftThreshold { // prox of gamma*||.||_1
        std::size_t dim;
        double gamma;
    };
    struct Resolvent { // (I + gamma*A)^{-1}, A symmetric PSD
        RealMatrix A;
        double gamma;
        RealMatrix solve; // precomputed (I + gamma*A)^{-1}
        std::vector<Vec> null_basis;
    };
    struct Averaged {
        double alpha;
        std::shared_ptr<const OperatorMap> inner;
    };
    struct Composition {
        std::vector<OperatorMap> factors; // applied right-to-left
    };
    struct BlackBox {
        std::size_t dim;
        std::function<Vec(const Vec &)> fn;
        std::optional<double> asserted_lipschitz;
        std::optional<FixedPointSet> declared_fix;
        std::string label;
    };
    using Payload = std::variant<Rotation, Scaling, Affine, HalfspaceProj, BoxProj, BallProj,
                                 AffineSetProj, SoftThreshold, Resolvent, Averaged, Composition,
                                 BlackBox>;

    OperatorMap(Payload p, std::size_t dim) : payload_(std::move(p)), dim_(dim) {}

  public:
    /// Plane rotation on R^2 by `angle` radians.
    static OperatorMap rotation(double angle) { return OperatorMap(Rotation{angle}, 2); }
    /// x ↦ alpha · x on R^dim.
    static OperatorMap scaling(std::size_t dim, double alpha) {
        if (dim == 0)
            throw precondition_error("scaling: dimension must be positive");
        return OperatorMap(Scaling{dim, alpha}, dim);
    }
    static OperatorMap affine(RealMatrix A, Vec b) {
        if (A.n == 0 || b.size() != A.n)
            throw precondition_error("affine: matrix/offset dimension mismatch");
        const std::size_t n = A.n;
        return OperatorMap(Affine{std::move(A), std::move(b)}, n);
    }
    static OperatorMap linear(RealMatrix A) {
        const std::size_t n = A.n;
        return affine(std::move(A), Vec(n, 0.0));
    }
    /// Metric projection onto {x : <a,x> ≤ beta}.
    static OperatorMap halfspace_projection(Vec a, double beta) {
        if (vec_norm(a) <= 0.0)
            throw precondition_error("halfspace_projection: normal vector must be nonzero");
        const std::size_t n = a.size();
        return OperatorMap(HalfspaceProj{std::move(a), beta}, n);
    }
    static OperatorMap box_projection(Vec lo, Vec hi) {
        if (lo.size() != hi.size() || lo.empty())
            throw precondition_error("box_projection: bound dimension mismatch");
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (lo[i] > hi[i])
                throw precondition_error("box_projection: lower bound exceeds upper bound");
        const std::size_t n = lo.size();
        return OperatorMap(BoxProj{std::move(lo), std::move(hi)}, n);
    }
    static OperatorMap ball_projection(Vec center, double radius) {
        if (!(radius > 0.0))
            throw precondition_error("ball_projection: radius must be positive");
        const std::size_t n = center.size();
        return OperatorMap(BallProj{std::move(center), radius}, n);
    }
    /// Metric projection onto the affine set point + span(directions).
    static OperatorMap affine_set_projection(Vec point, const std::vector<Vec> &directions) {
        const std::size_t n = point.size();
        for (const auto &d : directions)
            if (d.size() != n)
                throw precondition_error("affine_set_projection: direction dimension mismatch");
        return OperatorMap(AffineSetProj{std::move(point), detail::orthonormalize_real(directions)},
                           n);
    }
    /// Componentwise shrinkage prox of gamma·‖·‖₁ (firmly nonexpansive).
    static OperatorMap soft_threshold(std::size_t dim, double gamma) {
        if (dim == 0 || !(gamma > 0.0))
            throw precondition_error("soft_threshold: need positive dim and gamma");
        return OperatorMap(SoftThreshold{dim, gamma}, dim);
    }
    /// Resolvent (I + gamma·A)^{-1} of a linear monotone operator, restricted
    /// to symmetric PSD A (validated).
    static OperatorMap resolvent(const RealMatrix &A, double gamma) {
        if (!(gamma > 0.0))
            throw precondition_error("resolvent: gamma must be positive");
        if (!A.is_symmetric(1e-9))
            throw precondition_error("resolvent: A must be symmetric");
        const auto eig = hermitian_eigendecomposition(A.to_complex());
        // Realify each eigenvector (real symmetric input, so columns are real
        // up to a unit phase) and assemble (I + gamma A)^{-1} spectrally.
        std::vector<Vec> null_basis;
        RealMatrix inv(A.n);
        for (std::size_t j = 0; j < A.n; ++j) {
            if (eig.values[j] < -1e-9)
                throw precondition_error("resolvent: A must be positive semidefinite (eigenvalue " +
                                         std::to_string(eig.values[j]) + ")");
            auto v = detail::realify_phase(eig.vector(j));
            if (!v)
                throw precondition_error("resolvent: eigenvector realification failed");
            const double r = vec_norm(*v);
            for (auto &e : *v)
                e /= r;
            if (std::abs(eig.values[j]) <= 1e-9)
                null_basis.push_back(*v);
            const double w = 1.0 / (1.0 + gamma * std::max(0.0, eig.values[j]));
            for (std::size_t i = 0; i < A.n; ++i)
                for (std::size_t k = 0; k < A.n; ++k)
                    inv(i, k) += w * (*v)[i] * (*v)[k];
        }
        const std::size_t n = A.n;
        return OperatorMap(Resolvent{A, gamma, std::move(inv), std::move(null_basis)}, n);
    }
    /// (1−alpha)·I + alpha·S for alpha in (0,1).
    static OperatorMap averaged(double alpha, OperatorMap inner) {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw precondition_error("averaged: alpha must lie in (0,1)");
        const std::size_t n = inner.dim();
        return OperatorMap(Averaged{alpha, std::make_shared<OperatorMap>(std::move(inner))}, n);
    }
    /// factors[k-1] ∘ … ∘ factors[0]; factors are applied left-to-right in
    /// list order (first listed acts first).
    static OperatorMap compose(std::vector<OperatorMap> factors) {
        if (factors.empty())
            throw precondition_error("compose: factor list is empty");
        const std::size_t n = factors.front().dim();
        for (const auto &f : factors)
            if (f.dim() != n)
                throw precondition_error("compose: factor dimension mismatch");
        return OperatorMap(Composition{std::move(factors)}, n);
    }
    /// Black-box escape hatch: certified bound is +inf unless asserted.
    static OperatorMap black_box(std::size_t dim, std::function<Vec(const Vec &)> fn,
                                 std::optional<double> asserted_lipschitz = std::nullopt,
                                 std::optional<FixedPointSet> declared_fix = std::nullopt,
                                 std::string label = "black-box") {
        if (dim == 0 || !fn)
            throw precondition_error("black_box: need positive dim and a callable");
        return OperatorMap(BlackBox{dim, std::move(fn), asserted_lipschitz, std::move(declared_fix),
                                    std::move(label)},
                           dim);
    }

    [[nodiscard]] std::size_t dim() const { return dim_; }

    [[nodiscard]] std::string kind_name() const {
        struct V {
            std::string operator()(const Rotation &) const { return "rotation"; }
            std::string operator()(const Scaling &) const { return "scaling"; }
            std::string operator()(const Affine &) const { return "affine"; }
            std::string operator()(const HalfspaceProj &) const { return "halfspace-projection"; }
            std::string operator()(const BoxProj &) const { return "box-projection"; }
            std::string operator()(const BallProj &) const { return "ball-projection"; }
            std::string operator()(const AffineSetProj &) const { return "affine-set-projection"; }
            std::string operator()(const SoftThreshold &) const { return "soft-threshold"; }
            std::string operator()(const Resolvent &) const { return "resolvent"; }
            std::string operator()(const Averaged &) const { return "averaged"; }
            std::string operator()(const Composition &) const { return "composition"; }
            std::string operator()(const BlackBox &) const { return "black-box"; }
        };
        return std::visit(V{}, payload_);
    }

    [[nodiscard]] Vec apply(const Vec &x) const {
        if (x.size() != dim_)
            throw precondition_error("OperatorMap::apply: dimension mismatch");
        return std::visit([&](const auto &p) { return apply_impl(p, x); }, payload_);
    }

    /// Certified Lipschitz upper bound: exact spectral norm for linear kinds,
    /// 1 for metric projections / prox / resolvents, convex combination for
    /// averaged maps, factor product for compositions, +inf for unasserted
    /// black boxes.
    [[nodiscard]] double lipschitz_certified() const {
        struct V {
            double operator()(const Rotation &) const { return 1.0; }
            double operator()(const Scaling &s) const { return std::abs(s.alpha); }
            double operator()(const Affine &a) const { return a.A.spectral_norm(); }
            double operator()(const HalfspaceProj &) const { return 1.0; }
            double operator()(const BoxProj &) const { return 1.0; }
            double operator()(const BallProj &) const { return 1.0; }
            double operator()(const AffineSetProj &) const { return 1.0; }
            double operator()(const SoftThreshold &) const { return 1.0; }
            double operator()(const Resolvent &) const { return 1.0; }
            double operator()(const Averaged &av) const {
                return (1.0 - av.alpha) + av.alpha * av.inner->lipschitz_certified();
            }
            double operator()(const Composition &c) const {
                double prod = 1.0;
                for (const auto &f : c.factors)
                    prod *= f.lipschitz_certified();
                return prod;
            }
            double operator()(const BlackBox &bb) const {
                return bb.asserted_lipschitz.value_or(std::numeric_limits<double>::infinity());
            }
        };
        return std::visit(V{}, payload_);
    }

    /// Affine normal form when the map is exactly affine (rotation, scaling,
    /// affine, resolvent, affine-set projection, averaged/composition of
    /// affine parts). nullopt for genuinely nonlinear kinds.
    [[nodiscard]] std::optional<AffineForm> affine_form() const {
        struct V {
            std::size_t n;
            std::optional<AffineForm> operator()(const Rotation &r) const {
                RealMatrix m(2);
                m(0, 0) = std::cos(r.angle);
                m(0, 1) = -std::sin(r.angle);
                m(1, 0) = std::sin(r.angle);
                m(1, 1) = std::cos(r.angle);
                return AffineForm{m, Vec(2, 0.0)};
            }
            std::optional<AffineForm> operator()(const Scaling &s) const {
                RealMatrix m(s.dim);
                for (std::size_t i = 0; i < s.dim; ++i)
                    m(i, i) = s.alpha;
                return AffineForm{m, Vec(s.dim, 0.0)};
            }
            std::optional<AffineForm> operator()(const Affine &a) const {
                return AffineForm{a.A, a.b};
            }
            std::optional<AffineForm> operator()(const HalfspaceProj &) const {
                return std::nullopt;
            }
            std::optional<AffineForm> operator()(const BoxProj &) const { return std::nullopt; }
            std::optional<AffineForm> operator()(const BallProj &) const { return std::nullopt; }
            std::optional<AffineForm> operator()(const AffineSetProj &p) const {
                // proj(x) = point + VV^T (x − point)
                RealMatrix vvt(n);
                for (const auto &u : p.basis)
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = 0; j < n; ++j)
                            vvt(i, j) += u[i] * u[j];
                Vec b = p.point;
                const Vec vp = vvt.apply(p.point);
                for (std::size_t i = 0; i < n; ++i)
                    b[i] -= vp[i];
                return AffineForm{vvt, b};
            }
            std::optional<AffineForm> operator()(const SoftThreshold &) const {
                return std::nullopt;
            }
            std::optional<AffineForm> operator()(const Resolvent &r) const {
                return AffineForm{r.solve, Vec(n, 0.0)};
            }
            std::optional<AffineForm> operator()(const Averaged &av) const {
                auto inner = av.inner->affine_form();
                if (!inner)
                    return std::nullopt;
                RealMatrix m(n);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j)
                        m(i, j) = av.alpha * inner->A(i, j) + (i == j ? 1.0 - av.alpha : 0.0);
                Vec b = inner->b;
                for (auto &e : b)
                    e *= av.alpha;
                return AffineForm{std::move(m), std::move(b)};
            }
            std::optional<AffineForm> operator()(const Composition &c) const {
                // Accumulate left-to-right in application order:
                // after factor f, x ↦ f.A (A x + b) + f.b.
                RealMatrix acc = RealMatrix::identity(n);
                Vec off(n, 0.0);
                for (const auto &f : c.factors) {
                    auto form = f.affine_form();
                    if (!form)
                        return std::nullopt;
                    acc = form->A * acc;
                    off = form->A.apply(off);
                    for (std::size_t i = 0; i < n; ++i)
                        off[i] += form->b[i];
                }
                return AffineForm{std::move(acc), std::move(off)};
            }
            std::optional<AffineForm> operator()(const BlackBox &) const { return std::nullopt; }
        };
        return std::visit(V{dim_}, payload_);
    }

    /// Declared / derivable fixed-point structure.
    [[nodiscard]] FixedPointSet fixed_points() const {
        struct V {
            FixedPointSet operator()(const Rotation &r) const {
                FixedPointSet f;
                const double wrapped = std::remainder(r.angle, 2.0 * std::acos(-1.0));
                if (std::abs(wrapped) < 1e-15) {
                    f.kind = FixedPointSet::Kind::WholeSpace;
                    f.description = "identity rotation";
                } else {
                    f.kind = FixedPointSet::Kind::Point;
                    f.point = Vec(2, 0.0);
                    f.description = "origin (only fixed point of a nontrivial rotation)";
                }
                return f;
            }
            FixedPointSet operator()(const Scaling &s) const {
                FixedPointSet f;
                if (s.alpha == 1.0) {
                    f.kind = FixedPointSet::Kind::WholeSpace;
                    f.description = "identity scaling";
                } else {
                    f.kind = FixedPointSet::Kind::Point;
                    f.point = Vec(s.dim, 0.0);
                    f.description = "origin";
                }
                return f;
            }
            FixedPointSet operator()(const Affine &a) const {
                FixedPointSet f;
                RealMatrix ima = RealMatrix::identity(a.A.n) - a.A;
                if (auto z = solve_linear(ima, a.b)) {
                    f.kind = FixedPointSet::Kind::Point;
                    f.point = *z;
                    f.description = "unique solution of (I - A) z = b";
                } else {
                    f.kind = FixedPointSet::Kind::Unknown;
                    f.description = "I - A singular; fixed set not derived";
                }
                return f;
            }
            FixedPointSet convex(const char *what) const {
                FixedPointSet f;
                f.kind = FixedPointSet::Kind::ConvexSet;
                f.description = what;
                return f;
            }
            FixedPointSet operator()(const HalfspaceProj &) const { return convex("halfspace"); }
            FixedPointSet operator()(const BoxProj &) const { return convex("box"); }
            FixedPointSet operator()(const BallProj &) const { return convex("ball"); }
            FixedPointSet operator()(const AffineSetProj &p) const {
                FixedPointSet f;
                f.kind = FixedPointSet::Kind::AffineSet;
                f.point = p.point;
                f.basis = p.basis;
                f.description = "target affine set";
                return f;
            }
            FixedPointSet operator()(const SoftThreshold &s) const {
                FixedPointSet f;
                f.kind = FixedPointSet::Kind::Point;
                f.point = Vec(s.dim, 0.0);
                f.description = "origin (minimizer of the l1 objective)";
                return f;
            }
            FixedPointSet operator()(const Resolvent &r) const {
                FixedPointSet f;
                if (r.null_basis.empty()) {
                    f.kind = FixedPointSet::Kind::Point;
                    f.point = Vec(r.A.n, 0.0);
                    f.description = "origin (A has trivial nullspace)";
                } else {
                    f.kind = FixedPointSet::Kind::AffineSet;
                    f.point = Vec(r.A.n, 0.0);
                    f.basis = r.null_basis;
                    f.description = "null(A) (zeros of the monotone operator)";
                }
                return f;
            }
            FixedPointSet operator()(const Averaged &av) const {
                // Fix((1-a)I + aS) = Fix(S) for a in (0,1).
                return av.inner->fixed_points();
            }
            FixedPointSet operator()(const Composition &) const {
                FixedPointSet f;
                f.description = "composition: fixed set not derived";
                return f;
            }
            FixedPointSet operator()(const BlackBox &bb) const {
                if (bb.declared_fix)
                    return *bb.declared_fix;
                FixedPointSet f;
                f.description = "black box without declared fixed points";
                return f;
            }
        };
        return std::visit(V{}, payload_);
    }

    /// Metric projection onto Fix(T) when that set is projectable (projection
    /// kinds project with themselves; points and affine sets directly).
    [[nodiscard]] std::optional<Vec> project_onto_fix(const Vec &x) const {
        const FixedPointSet f = fixed_points();
        switch (f.kind) {
        case FixedPointSet::Kind::WholeSpace:
            return x;
        case FixedPointSet::Kind::Point:
            return f.point;
        case FixedPointSet::Kind::AffineSet:
            return detail::project_affine_set(x, f.point, f.basis);
        case FixedPointSet::Kind::ConvexSet:
            return apply(x); // the operator is itself the metric projection
        case FixedPointSet::Kind::Unknown:
            return std::nullopt;
        }
        return std::nullopt;
    }

    /// Structured parameter access for serialization layers.
    template <class Visitor> auto visit_payload(Visitor &&v) const {
        return std::visit(std::forward<Visitor>(v), payload_);
    }
    // Parameter peek helpers (nullopt when the kind does not match).
    [[nodiscard]] std::optional<double> rotation_angle() const {
        if (const auto *r = std::get_if<Rotation>(&payload_))
            return r->angle;
        return std::nullopt;
    }
    [[nodiscard]] std::optional<double> scaling_factor() const {
        if (const auto *s = std::get_if<Scaling>(&payload_))
            return s->alpha;
        return std::nullopt;
    }

  private:
    static Vec apply_impl(const Rotation &r, const Vec &x) {
        const double c = std::cos(r.angle), s = std::sin(r.angle);
        return Vec{c * x[0] - s * x[1], s * x[0] + c * x[1]};
    }
    static Vec apply_impl(const Scaling &sc, const Vec &x) {
        Vec y = x;
        for (auto &e : y)
            e *= sc.alpha;
        return y;
    }
    static Vec apply_impl(const Affine &a, const Vec &x) {
        Vec y = a.A.apply(x);
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] += a.b[i];
        return y;
    }
    static Vec apply_impl(const HalfspaceProj &h, const Vec &x) {
        const double viol = vec_dot(h.a, x) - h.beta;
        if (viol <= 0.0)
            return x;
        const double nn = vec_dot(h.a, h.a);
        Vec y = x;
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] -= (viol / nn) * h.a[i];
        return y;
    }
    static Vec apply_impl(const BoxProj &b, const Vec &x) {
        Vec y = x;
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] = std::clamp(y[i], b.lo[i], b.hi[i]);
        return y;
    }
    static Vec apply_impl(const BallProj &b, const Vec &x) {
        Vec d = x;
        for (std::size_t i = 0; i < d.size(); ++i)
            d[i] -= b.center[i];
        const double r = vec_norm(d);
        if (r <= b.radius)
            return x;
        Vec y = b.center;
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] += (b.radius / r) * d[i];
        return y;
    }
    static Vec apply_impl(const AffineSetProj &p, const Vec &x) {
        return detail::project_affine_set(x, p.point, p.basis);
    }
    static Vec apply_impl(const SoftThreshold &s, const Vec &x) {
        Vec y = x;
        for (auto &e : y) {
            const double m = std::abs(e) - s.gamma;
            e = m > 0.0 ? (e > 0.0 ? m : -m) : 0.0;
        }
        return y;
    }
    static Vec apply_impl(const Resolvent &r, const Vec &x) { return r.solve.apply(x); }
    static Vec apply_impl(const Averaged &av, const Vec &x) {
        Vec y = av.inner->apply(x);
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] = (1.0 - av.alpha) * x[i] + av.alpha * y[i];
        return y;
    }
    static Vec apply_impl(const Composition &c, const Vec &x) {
        Vec y = x;
        for (const auto &f : c.factors)
            y = f.apply(y);
        return y;
    }
    static Vec apply_impl(const BlackBox &bb, const Vec &x) {
        Vec y = bb.fn(x);
        if (y.size() != bb.dim)
            throw std::runtime_error("black-box operator returned wrong dimension");
        return y;
    }

    Payload payload_;
    std::size_t dim_;
};

// ---------------------------------------------------------------------------
// Sampled lower bound (kept strictly separate from certification)
// ---------------------------------------------------------------------------

/// Empirical lower bound on the Lipschitz modulus: max ratio over `trials`
/// pairs drawn uniformly from the ball of `radius` (default 10) around the
/// origin. Deterministic for a fixed seed.
inline double lipschitz_sampled_lower(const OperatorMap &op, int trials = 200,
                                      std::uint64_t seed = 42, double radius = 10.0) {
    if (trials <= 0)
        throw precondition_error("lipschitz_sampled_lower: trials must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::size_t n = op.dim();
    const auto draw = [&] {
        Vec x(n);
        for (auto &e : x)
            e = gauss(rng);
        const double r = vec_norm(x);
        const double target = radius * std::pow(unif(rng), 1.0 / static_cast<double>(n));
        if (r > 1e-300)
            for (auto &e : x)
                e *= target / r;
        return x;
    };
    double best = 0.0;
    for (int t = 0; t < trials; ++t) {
        const Vec x = draw(), y = draw();
        const double den = vec_dist(x, y);
        if (den < 1e-12)
            continue;
        best = std::max(best, vec_dist(op.apply(x), op.apply(y)) / den);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Common fixed points
// ---------------------------------------------------------------------------

struct CommonFixedPointResult {
    std::optional<Vec> point;
    std::vector<double> residuals; ///< ‖T_t z − z‖ per member (when a point was produced)
    std::string diagnostic;
};

/// Tries to produce a point of ∩ Fix(T_t) from declared structure: a declared
/// point verified against every member, else cyclic projections onto the
/// members' fixed sets (convex targets at desk scale), run until the cycle
/// residual drops below `ap_residual` or `cap` projections. The returned
/// point always carries verified residuals ‖T_t z − z‖ ≤ tol; otherwise the
/// result is absent with a diagnostic.
inline CommonFixedPointResult common_fixed_point(const std::vector<OperatorMap> &family,
                                                 double tol = 1e-9, double ap_residual = 1e-12,
                                                 long cap = 1000000) {
    if (family.empty())
        throw precondition_error("common_fixed_point: empty family");
    const std::size_t n = family.front().dim();
    for (const auto &t : family)
        if (t.dim() != n)
            throw precondition_error("common_fixed_point: member dimension mismatch");

    CommonFixedPointResult out;
    const auto verify = [&](const Vec &z) {
        std::vector<double> res;
        res.reserve(family.size());
        bool ok = true;
        for (const auto &t : family) {
            res.push_back(vec_dist(t.apply(z), z));
            ok = ok && res.back() <= tol;
        }
        return std::make_pair(ok, res);
    };

    // 1) Declared points, cheapest first.
    for (const auto &t : family) {
        const FixedPointSet f = t.fixed_points();
        if (f.kind == FixedPointSet::Kind::Point) {
            auto [ok, res] = verify(f.point);
            if (ok) {
                out.point = f.point;
                out.residuals = std::move(res);
                out.diagnostic = "declared point verified on all members";
                return out;
            }
        }
    }

    // 2) Cyclic projections onto the declared fixed sets.
    bool all_projectable = true;
    for (const auto &t : family)
        all_projectable = all_projectable && t.project_onto_fix(Vec(n, 0.0)).has_value();
    if (all_projectable) {
        Vec z(n, 0.0);
        long used = 0;
        double cycle_move = std::numeric_limits<double>::infinity();
        while (used < cap) {
            const Vec before = z;
            for (const auto &t : family) {
                z = *t.project_onto_fix(z);
                ++used;
            }
            cycle_move = vec_dist(before, z);
            if (cycle_move <= ap_residual)
                break;
        }
        auto [ok, res] = verify(z);
        if (ok) {
            out.point = z;
            out.residuals = std::move(res);
            out.diagnostic = "cyclic projections onto declared fixed sets";
            return out;
        }
        out.diagnostic = "cyclic projections stalled (cycle move " + std::to_string(cycle_move) +
                         "); intersection may be empty";
        return out;
    }

    for (const auto &t : family)
        if (!t.project_onto_fix(Vec(n, 0.0)).has_value()) {
            out.diagnostic =
                "fixed-point structure not derivable for a member of kind '" + t.kind_name() + "'";
            break;
        }
    return out;
}

} // namespace anchorlab

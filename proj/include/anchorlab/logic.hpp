#pragma once

/// @file
/// Projection logic over a finite-dimensional complex Hilbert space:
/// state valuations, implication with a commutation side condition against an
/// anchor family, classical reduction in the commuting regime, the Sasaki
/// hook, residuation on commuting triples, sequent-style rules, and the
/// threshold variant for effects.

#include <anchorlab/linalg.hpp>

#include <array>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace anchorlab {

/// A named projection used as a logical proposition.
struct Proposition {
    ProjectionOp projection;
    std::string label;

    Proposition(ProjectionOp p, std::string name = "") // NOLINT(google-explicit-constructor)
        : projection(std::move(p)), label(std::move(name)) {}
    [[nodiscard]] std::size_t dim() const { return projection.dim(); }
};

/// Anchor: a finite family of projection generators. The side condition of
/// the implication connective quantifies over every generator.
class Anchor {
  public:
    explicit Anchor(std::vector<ProjectionOp> generators) : gens_(std::move(generators)) {
        if (gens_.empty())
            throw precondition_error("Anchor: generator list is empty");
        for (const auto &g : gens_)
            if (g.dim() != gens_.front().dim())
                throw precondition_error("Anchor: generators have mixed dimensions");
        bool nonzero = false;
        for (const auto &g : gens_)
            nonzero = nonzero || g.matrix().max_abs_entry() > kAlgebraTol;
        if (!nonzero)
            throw precondition_error("Anchor: all generators are zero");
    }
    static Anchor single(ProjectionOp p) { return Anchor(std::vector<ProjectionOp>{std::move(p)}); }

    [[nodiscard]] const std::vector<ProjectionOp> &generators() const { return gens_; }
    [[nodiscard]] std::size_t dim() const { return gens_.front().dim(); }

  private:
    std::vector<ProjectionOp> gens_;
};

/// Result of evaluating a proposition or connective at a state.
/// Invariant: value == 1 implies vacuous or side_condition_held.
struct Valuation {
    int value = 0;                  ///< 0 or 1
    bool side_condition_held = true; ///< commutation check outcome (true when no condition applies)
    bool vacuous = false;           ///< implication true because the antecedent failed
};

/// v_ψ(A) = 1 iff E_A ψ = ψ, tested as ‖E_A ψ − ψ‖ ≤ membership_tol.
inline Valuation valuate(const ProjectionOp &e, const StateVector &psi,
                         double membership_tol = kMembershipTol) {
    if (e.dim() != psi.dim())
        throw precondition_error("valuate: projection/state dimension mismatch");
    const auto img = e.matrix().apply(psi.entries());
    double dev = 0.0;
    for (std::size_t i = 0; i < img.size(); ++i)
        dev += std::norm(img[i] - psi.entries()[i]);
    return Valuation{std::sqrt(dev) <= membership_tol ? 1 : 0, true, false};
}
inline Valuation valuate(const Proposition &a, const StateVector &psi,
                         double membership_tol = kMembershipTol) {
    return valuate(a.projection, psi, membership_tol);
}

namespace detail {

/// First anchor generator that fails to commute with m, with the commutator's
/// operator norm. nullopt when all commute within tol.
inline std::optional<std::pair<std::size_t, double>>
first_noncommuting(const ComplexMatrix &m, const Anchor &anchor, double tol) {
    for (std::size_t i = 0; i < anchor.generators().size(); ++i) {
        const double nrm = operator_norm(commutator(m, anchor.generators()[i].matrix()));
        if (nrm > tol)
            return std::make_pair(i, nrm);
    }
    return std::nullopt;
}

inline std::string ordinal_generator(std::size_t i) {
    return "anchor generator #" + std::to_string(i);
}

} // namespace detail

/// Global commutation side condition: [E, P_i] = 0 for every anchor generator,
/// in operator norm within tol.
inline bool commutation_side_condition(const ProjectionOp &e, const Anchor &anchor,
                                       double tol = kAlgebraTol) {
    if (e.dim() != anchor.dim())
        throw precondition_error("commutation_side_condition: dimension mismatch");
    return !detail::first_noncommuting(e.matrix(), anchor, tol).has_value();
}
inline bool commutation_side_condition(const Proposition &b, const Anchor &anchor,
                                       double tol = kAlgebraTol) {
    return commutation_side_condition(b.projection, anchor, tol);
}

/// Anchored implication at a state: true vacuously when v_ψ(A) = 0; otherwise
/// true iff v_ψ(B) = 1 and the consequent commutes with every anchor
/// generator. side_condition_held always reports the commutation check.
inline Valuation anchored_implication(const Proposition &a, const Proposition &b,
                                      const Anchor &anchor, const StateVector &psi,
                                      double membership_tol = kMembershipTol,
                                      double commutation_tol = kAlgebraTol) {
    if (a.dim() != b.dim() || a.dim() != anchor.dim() || a.dim() != psi.dim())
        throw precondition_error("anchored_implication: dimension mismatch");
    const bool side = commutation_side_condition(b, anchor, commutation_tol);
    const Valuation va = valuate(a, psi, membership_tol);
    if (va.value == 0)
        return Valuation{1, side, true};
    const Valuation vb = valuate(b, psi, membership_tol);
    return Valuation{(vb.value == 1 && side) ? 1 : 0, side, false};
}

/// Classical reduction I − E_A + E_A E_B, valid when both E_A and E_B commute
/// with every anchor generator. Refuses otherwise, naming the failing
/// commutator. The result is validated as a projection (which additionally
/// requires [E_A, E_B] = 0; a non-commuting pair surfaces as an idempotency
/// failure).
inline ProjectionOp reduced_implication_projection(const Proposition &a, const Proposition &b,
                                                   const Anchor &anchor,
                                                   double commutation_tol = kAlgebraTol) {
    if (a.dim() != b.dim() || a.dim() != anchor.dim())
        throw precondition_error("reduced_implication_projection: dimension mismatch");
    if (auto fail = detail::first_noncommuting(a.projection.matrix(), anchor, commutation_tol)) {
        std::ostringstream os;
        os << "reduced_implication_projection: antecedent does not commute with "
           << detail::ordinal_generator(fail->first) << " (commutator norm " << fail->second << ")";
        throw precondition_error(os.str());
    }
    if (auto fail = detail::first_noncommuting(b.projection.matrix(), anchor, commutation_tol)) {
        std::ostringstream os;
        os << "reduced_implication_projection: consequent does not commute with "
           << detail::ordinal_generator(fail->first) << " (commutator norm " << fail->second << ")";
        throw precondition_error(os.str());
    }
    const auto &ea = a.projection.matrix();
    const auto &eb = b.projection.matrix();
    return ProjectionOp(ComplexMatrix::identity(ea.dim()) - ea + ea * eb);
}

/// Sasaki hook ¬A ∨ (A ∧ B). The two joinands have orthogonal ranges
/// (ran(A∧B) ⊆ ran A ⊥ ran ¬A), so the join is the orthogonal sum.
inline ProjectionOp sasaki_hook(const Proposition &a, const Proposition &b) {
    if (a.dim() != b.dim())
        throw precondition_error("sasaki_hook: dimension mismatch");
    const ProjectionOp meet = subspace_meet(a.projection, b.projection);
    return ProjectionOp(a.projection.complement().matrix() + meet.matrix());
}

// ---------------------------------------------------------------------------
// The two-regime truth table
// ---------------------------------------------------------------------------

/// One row of the implication truth table: antecedent/consequent values at the
/// probe state, the implication value under a commuting and a non-commuting
/// anchor, and the classical material value a → b.
struct NoSynonymRow {
    int a = 0;
    int b = 0;
    int anchored_commuting = 0;
    int anchored_noncommuting = 0;
    int classical = 0;
};

struct NoSynonymTable {
    std::array<NoSynonymRow, 4> rows{}; ///< ordered 00, 01, 10, 11

    /// Rows where the non-commuting anchored value differs from classical.
    [[nodiscard]] std::vector<std::size_t> mismatch_rows() const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (rows[i].anchored_noncommuting != rows[i].classical)
                idx.push_back(i);
        return idx;
    }
    /// The headline pattern: rows 00, 01, 10 agree; row 11 differs.
    [[nodiscard]] bool matches_expected_pattern() const {
        const auto mm = mismatch_rows();
        return mm.size() == 1 && mm.front() == 3;
    }
};

/// Builds the dim-2 witness family: propositions from {span e1, span e2},
/// probe state e1, commuting anchor diag(1,0) vs non-commuting anchor
/// (the projection onto span{(1,1)}). Demonstrates that no single classical
/// connective reproduces the anchored implication across anchor regimes.
inline NoSynonymTable no_synonym_table() {
    const ProjectionOp onto_e1 = ProjectionOp::diagonal({1, 0});
    const ProjectionOp onto_e2 = ProjectionOp::diagonal({0, 1});
    const Anchor commuting = Anchor::single(onto_e1);
    const Anchor noncommuting =
        Anchor::single(ProjectionOp::rank_one({cplx{1.0, 0.0}, cplx{1.0, 0.0}}));
    const StateVector psi = StateVector::basis(2, 0);

    NoSynonymTable table;
    for (std::size_t r = 0; r < 4; ++r) {
        const int a = static_cast<int>(r >> 1U);
        const int b = static_cast<int>(r & 1U);
        // v_ψ(span e1) = 1 and v_ψ(span e2) = 0 at ψ = e1, so pick the span
        // that realizes the requested truth value.
        const Proposition pa{a == 1 ? onto_e1 : onto_e2, a == 1 ? "A=[e1]" : "A=[e2]"};
        const Proposition pb{b == 1 ? onto_e1 : onto_e2, b == 1 ? "B=[e1]" : "B=[e2]"};
        NoSynonymRow row;
        row.a = a;
        row.b = b;
        row.anchored_commuting = anchored_implication(pa, pb, commuting, psi).value;
        row.anchored_noncommuting = anchored_implication(pa, pb, noncommuting, psi).value;
        row.classical = (a == 0 || b == 1) ? 1 : 0;
        table.rows[r] = row;
    }
    return table;
}

// ---------------------------------------------------------------------------
// Residuation on commuting triples
// ---------------------------------------------------------------------------

namespace detail {

inline void require_pairwise_commuting(const Proposition &x, const Proposition &y,
                                       const char *who, double tol) {
    const double nrm = operator_norm(commutator(x.projection.matrix(), y.projection.matrix()));
    if (nrm > tol) {
        std::ostringstream os;
        os << who << ": propositions '" << x.label << "' and '" << y.label
           << "' do not commute (commutator norm " << nrm << ")";
        throw precondition_error(os.str());
    }
}

} // namespace detail

/// Residuation pair on a commuting triple: returns
///   (E_X ≤ I − E_A + E_A E_B,  E_A E_X ≤ E_B).
/// Hypotheses: A, B, X pairwise commute and each commutes with every anchor
/// generator; violations refuse with a diagnostic naming the failing pair.
inline std::pair<bool, bool> residuation_check(const Proposition &a, const Proposition &b,
                                               const Proposition &x, const Anchor &anchor,
                                               double tol = kAlgebraTol) {
    if (a.dim() != b.dim() || a.dim() != x.dim() || a.dim() != anchor.dim())
        throw precondition_error("residuation_check: dimension mismatch");
    for (const auto *p : {&a, &b, &x})
        if (auto fail = detail::first_noncommuting(p->projection.matrix(), anchor, tol)) {
            std::ostringstream os;
            os << "residuation_check: proposition '" << p->label << "' does not commute with "
               << detail::ordinal_generator(fail->first) << " (commutator norm " << fail->second
               << ")";
            throw precondition_error(os.str());
        }
    detail::require_pairwise_commuting(a, b, "residuation_check", tol);
    detail::require_pairwise_commuting(a, x, "residuation_check", tol);
    detail::require_pairwise_commuting(b, x, "residuation_check", tol);

    const ProjectionOp imp = reduced_implication_projection(a, b, anchor, tol);
    const ProjectionOp meet_ax(a.projection.matrix() * x.projection.matrix(), 10 * tol);
    const bool lhs = projection_leq(x.projection, imp, tol);
    const bool rhs = projection_leq(meet_ax, b.projection, tol);
    return {lhs, rhs};
}

// ---------------------------------------------------------------------------
// Sequent-style rules
// ---------------------------------------------------------------------------

enum class SequentRule {
    IntroVacuous,       ///< from v(A) = 0 conclude A ⇒ B
    IntroCommuting,     ///< from v(A) = 1, v(B) = 1, side condition, conclude A ⇒ B
    Elim,               ///< from A ⇒ B, v(A) = 1, side condition, conclude v(B) = 1
    MonotoneAntecedent, ///< from E_A ≤ E_A' and side condition, conclude (A' ⇒ B) ≤ (A ⇒ B)
};

/// Premise bundle; which fields are required depends on the rule.
struct SequentPremises {
    std::optional<Proposition> a;
    std::optional<Proposition> a_stronger; ///< A' with E_A ≤ E_A' (MonotoneAntecedent only)
    std::optional<Proposition> b;
    std::optional<Anchor> anchor;
    std::optional<StateVector> psi; ///< required except for state-free MonotoneAntecedent
};

struct SequentResult {
    bool premises_hold = false;   ///< all rule premises verified
    bool conclusion_holds = false; ///< conclusion verified (meaningful when premises_hold)
    std::string detail;
};

/// Checks a rule's premises/side conditions semantically and then verifies
/// the conclusion. Malformed premise bundles throw.
inline SequentResult sequent_apply(SequentRule rule, const SequentPremises &prem,
                                   double membership_tol = kMembershipTol,
                                   double commutation_tol = kAlgebraTol) {
    const auto need = [](const auto &opt, const char *what) -> const auto & {
        if (!opt)
            throw precondition_error(std::string("sequent_apply: missing premise field: ") + what);
        return *opt;
    };
    SequentResult res;
    switch (rule) {
    case SequentRule::IntroVacuous: {
        const auto &a = need(prem.a, "antecedent");
        const auto &b = need(prem.b, "consequent");
        const auto &anchor = need(prem.anchor, "anchor");
        const auto &psi = need(prem.psi, "state");
        res.premises_hold = valuate(a, psi, membership_tol).value == 0;
        res.conclusion_holds =
            anchored_implication(a, b, anchor, psi, membership_tol, commutation_tol).value == 1;
        res.detail = res.premises_hold ? "antecedent fails at the state; implication vacuous"
                                       : "antecedent holds at the state; rule not applicable";
        return res;
    }
    case SequentRule::IntroCommuting: {
        const auto &a = need(prem.a, "antecedent");
        const auto &b = need(prem.b, "consequent");
        const auto &anchor = need(prem.anchor, "anchor");
        const auto &psi = need(prem.psi, "state");
        const bool side = commutation_side_condition(b, anchor, commutation_tol);
        res.premises_hold = valuate(a, psi, membership_tol).value == 1 &&
                            valuate(b, psi, membership_tol).value == 1 && side;
        res.conclusion_holds =
            anchored_implication(a, b, anchor, psi, membership_tol, commutation_tol).value == 1;
        res.detail = side ? "side condition holds" : "side condition fails";
        return res;
    }
    case SequentRule::Elim: {
        const auto &a = need(prem.a, "antecedent");
        const auto &b = need(prem.b, "consequent");
        const auto &anchor = need(prem.anchor, "anchor");
        const auto &psi = need(prem.psi, "state");
        const bool side = commutation_side_condition(b, anchor, commutation_tol);
        const Valuation imp =
            anchored_implication(a, b, anchor, psi, membership_tol, commutation_tol);
        res.premises_hold = imp.value == 1 && valuate(a, psi, membership_tol).value == 1 && side;
        res.conclusion_holds = valuate(b, psi, membership_tol).value == 1;
        res.detail = "detachment from a non-vacuous implication";
        return res;
    }
    case SequentRule::MonotoneAntecedent: {
        const auto &a = need(prem.a, "antecedent");
        const auto &ap = need(prem.a_stronger, "stronger antecedent");
        const auto &b = need(prem.b, "consequent");
        const auto &anchor = need(prem.anchor, "anchor");
        const bool order = projection_leq(a.projection, ap.projection, commutation_tol);
        const bool side = commutation_side_condition(b, anchor, commutation_tol);
        res.premises_hold = order && side;
        if (prem.psi) {
            // Strengthening the antecedent can only lose truth:
            // v(A' ⇒ B) ≤ v(A ⇒ B).
            const int weaker =
                anchored_implication(a, b, anchor, *prem.psi, membership_tol, commutation_tol)
                    .value;
            const int stronger =
                anchored_implication(ap, b, anchor, *prem.psi, membership_tol, commutation_tol)
                    .value;
            res.conclusion_holds = stronger <= weaker;
            res.detail = "valuation order checked at the given state";
        } else {
            // State-free form: under the side condition both implications
            // reduce classically; check the projection order.
            const ProjectionOp imp_a = reduced_implication_projection(a, b, anchor, commutation_tol);
            const ProjectionOp imp_ap =
                reduced_implication_projection(ap, b, anchor, commutation_tol);
            res.conclusion_holds = projection_leq(imp_ap, imp_a, commutation_tol);
            res.detail = "projection order of the reduced implications";
        }
        return res;
    }
    }
    throw precondition_error("sequent_apply: unknown rule");
}

// ---------------------------------------------------------------------------
// Threshold (effect) variant
// ---------------------------------------------------------------------------

/// τ-anchored implication between effects: thresholds both effects at τ and
/// evaluates the anchored implication between the threshold projections. The
/// side condition is on the *effect* consequent: [B, P] = 0 for every anchor
/// generator (the thresholded projection may commute even when B does not;
/// callers can report both commutators).
inline Valuation tau_anchored_implication(const EffectOp &a, const EffectOp &b,
                                          const Anchor &anchor, double tau,
                                          const StateVector &psi,
                                          double membership_tol = kMembershipTol,
                                          double commutation_tol = kAlgebraTol,
                                          double tie_tol = kEigTieTol) {
    if (a.dim() != b.dim() || a.dim() != anchor.dim() || a.dim() != psi.dim())
        throw precondition_error("tau_anchored_implication: dimension mismatch");
    if (!(tau >= 0.0 && tau <= 1.0))
        throw precondition_error("tau_anchored_implication: tau must lie in [0,1]");
    bool side = true;
    for (const auto &g : anchor.generators())
        side = side && operator_norm(commutator(b.matrix(), g.matrix())) <= commutation_tol;
    const ProjectionOp pa = spectral_threshold_projection(a, tau, tie_tol);
    const ProjectionOp pb = spectral_threshold_projection(b, tau, tie_tol);
    const Valuation va = valuate(pa, psi, membership_tol);
    if (va.value == 0)
        return Valuation{1, side, true};
    const Valuation vb = valuate(pb, psi, membership_tol);
    return Valuation{(vb.value == 1 && side) ? 1 : 0, side, false};
}

/// Classical reduction of the τ-anchored implication,
/// I − P_{A,τ} + P_{A,τ} P_{B,τ}, requiring both *effects* to commute with
/// every anchor generator. Validated as a projection (non-commuting threshold
/// projections surface as an idempotency failure).
inline ProjectionOp tau_reduced_projection(const EffectOp &a, const EffectOp &b,
                                           const Anchor &anchor, double tau,
                                           double commutation_tol = kAlgebraTol,
                                           double tie_tol = kEigTieTol) {
    if (a.dim() != b.dim() || a.dim() != anchor.dim())
        throw precondition_error("tau_reduced_projection: dimension mismatch");
    for (std::size_t i = 0; i < anchor.generators().size(); ++i) {
        for (const auto *eff : {&a, &b}) {
            const double nrm =
                operator_norm(commutator(eff->matrix(), anchor.generators()[i].matrix()));
            if (nrm > commutation_tol) {
                std::ostringstream os;
                os << "tau_reduced_projection: effect " << (eff == &a ? "A" : "B")
                   << " does not commute with " << detail::ordinal_generator(i)
                   << " (commutator norm " << nrm << ")";
                throw precondition_error(os.str());
            }
        }
    }
    const ComplexMatrix pa = spectral_threshold_projection(a, tau, tie_tol).matrix();
    const ComplexMatrix pb = spectral_threshold_projection(b, tau, tie_tol).matrix();
    return ProjectionOp(ComplexMatrix::identity(a.dim()) - pa + pa * pb, 10 * kAlgebraTol);
}

} // namespace anchorlab

#pragma once

/// @file
/// Event-indexed contraction analysis: event schedules over nonexpansive
/// orbits, staircase/product decay envelopes, per-block contraction
/// certificates, envelope verification against recorded orbits, aggregate
/// log-slope bounds, power-contraction indices, the single-map geometric rate
/// check (with its validity boundary), subspace-anchored convergence for
/// partially contractive affine maps, and tight worked constructions that
/// meet their envelopes exactly.

#include <anchorlab/linalg.hpp>
#include <anchorlab/operators.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace anchorlab {

/// Hard cap on orbit length; beyond this the run refuses rather than spin.
inline constexpr long kOrbitCap = 1000000;
/// Distances below this are reported as exact zeros (subnormal noise guard).
inline constexpr double kDistClamp = 1e-300;
/// Slack allowed when comparing a certificate against its target factor.
inline constexpr double kCertSlack = 1e-9;
/// Absolute tolerance for envelope-equality ("tightness") claims.
inline constexpr double kEqualityTol = 1e-12;

// ---------------------------------------------------------------------------
// EventSchedule
// ---------------------------------------------------------------------------

/// Strictly increasing event indices n_1 < n_2 < …, each carrying a
/// contraction factor λ_k ∈ (0,1). The step producing x_{n_k} is the k-th
/// event step; all other steps are merely nonexpansive.
class EventSchedule {
    struct Periodic {
        double lambda;
        long period;
        long first;
    };
    struct Blocks {
        std::vector<std::pair<double, long>> blocks; // (λ_k, block length N_k)
    };
    struct Listed {
        std::vector<std::pair<long, double>> events; // (n_k, λ_k)
    };
    std::variant<Periodic, Blocks, Listed> form_;

    explicit EventSchedule(std::variant<Periodic, Blocks, Listed> f) : form_(std::move(f)) {}

    static void check_factor(double lambda) {
        if (!(lambda > 0.0 && lambda < 1.0))
            throw precondition_error("event factor must lie in (0,1), got " +
                                     std::to_string(lambda));
    }

  public:
    /// Events at first, first+period, first+2·period, … with a common factor.
    /// `first` defaults to `period`.
    static EventSchedule periodic(double lambda, long period, long first = -1) {
        check_factor(lambda);
        if (period < 1)
            throw precondition_error("event period must be >= 1");
        if (first == -1)
            first = period;
        if (first < 1)
            throw precondition_error("first event index must be >= 1");
        return EventSchedule(Periodic{lambda, period, first});
    }
    /// Consecutive blocks (λ_k, N_k): the k-th event closes block k at
    /// n_k = N_1 + … + N_k.
    static EventSchedule blocks(std::vector<std::pair<double, long>> bl) {
        if (bl.empty())
            throw precondition_error("block schedule must be nonempty");
        for (const auto &[lam, len] : bl) {
            check_factor(lam);
            if (len < 1)
                throw precondition_error("block length must be >= 1");
        }
        return EventSchedule(Blocks{std::move(bl)});
    }
    /// Explicit (n_k, λ_k) list, strictly increasing indices ≥ 1.
    static EventSchedule from_events(std::vector<std::pair<long, double>> ev) {
        if (ev.empty())
            throw precondition_error("event list must be nonempty");
        long prev = 0;
        for (const auto &[n, lam] : ev) {
            if (n <= prev)
                throw precondition_error("event indices must be strictly increasing and >= 1");
            prev = n;
            check_factor(lam);
        }
        return EventSchedule(Listed{std::move(ev)});
    }

    [[nodiscard]] std::optional<double> factor_at(long n) const {
        if (n < 1)
            return std::nullopt;
        if (const auto *p = std::get_if<Periodic>(&form_)) {
            if (n >= p->first && (n - p->first) % p->period == 0)
                return p->lambda;
            return std::nullopt;
        }
        if (const auto *b = std::get_if<Blocks>(&form_)) {
            long edge = 0;
            for (const auto &[lam, len] : b->blocks) {
                edge += len;
                if (edge == n)
                    return lam;
                if (edge > n)
                    return std::nullopt;
            }
            return std::nullopt;
        }
        const auto &ev = std::get<Listed>(form_).events;
        for (const auto &[idx, lam] : ev)
            if (idx == n)
                return lam;
        return std::nullopt;
    }
    [[nodiscard]] bool is_event(long n) const { return factor_at(n).has_value(); }

    [[nodiscard]] std::optional<long> first_event() const {
        if (const auto *p = std::get_if<Periodic>(&form_))
            return p->first;
        if (const auto *b = std::get_if<Blocks>(&form_))
            return b->blocks.front().second;
        return std::get<Listed>(form_).events.front().first;
    }

    /// Materialized (n_k, λ_k) pairs with n_k ≤ horizon.
    [[nodiscard]] std::vector<std::pair<long, double>> events_up_to(long horizon) const {
        std::vector<std::pair<long, double>> out;
        if (const auto *p = std::get_if<Periodic>(&form_)) {
            for (long n = p->first; n <= horizon; n += p->period)
                out.emplace_back(n, p->lambda);
            return out;
        }
        if (const auto *b = std::get_if<Blocks>(&form_)) {
            long edge = 0;
            for (const auto &[lam, len] : b->blocks) {
                edge += len;
                if (edge > horizon)
                    break;
                out.emplace_back(edge, lam);
            }
            return out;
        }
        for (const auto &[n, lam] : std::get<Listed>(form_).events)
            if (n <= horizon)
                out.emplace_back(n, lam);
        return out;
    }
    [[nodiscard]] long count_up_to(long horizon) const {
        return static_cast<long>(events_up_to(horizon).size());
    }

    [[nodiscard]] bool is_periodic() const { return std::holds_alternative<Periodic>(form_); }
    /// (λ, period, first) when periodic.
    [[nodiscard]] std::optional<std::tuple<double, long, long>> periodic_params() const {
        if (const auto *p = std::get_if<Periodic>(&form_))
            return std::make_tuple(p->lambda, p->period, p->first);
        return std::nullopt;
    }
};

// ---------------------------------------------------------------------------
// EnvelopeSpec
// ---------------------------------------------------------------------------

/// A decay envelope evaluated against the distance at the orbit start
/// (index 0): the guarantee is dist(n) ≤ value(n) · dist(0) for n ≥ start().
/// Undefined (throws) before the first event — no decay has been earned yet.
class EnvelopeSpec {
    struct PeriodicFloor {
        double lambda;
        long period;
        long start; // first event index
    };
    struct Product {
        std::vector<std::pair<long, double>> events; // (n_k, λ_k), increasing
        std::vector<double> prefix;                  // prefix[k] = λ_1⋯λ_{k+1}
    };
    std::variant<PeriodicFloor, Product> form_;

    explicit EnvelopeSpec(std::variant<PeriodicFloor, Product> f) : form_(std::move(f)) {}

  public:
    /// value(n) = λ^{1 + ⌊(n − start)/period⌋} for n ≥ start.
    static EnvelopeSpec periodic_floor(double lambda, long period, long start) {
        if (!(lambda > 0.0 && lambda < 1.0) || period < 1 || start < 1)
            throw precondition_error("periodic envelope needs λ in (0,1), period >= 1, start >= 1");
        return EnvelopeSpec(PeriodicFloor{lambda, period, start});
    }
    /// value(n) = ∏_{k : n_k ≤ n} λ_k for n ≥ n_1.
    static EnvelopeSpec product(std::vector<std::pair<long, double>> events) {
        if (events.empty())
            throw precondition_error("product envelope needs at least one event");
        long prev = 0;
        std::vector<double> prefix;
        double running = 1.0;
        for (const auto &[n, lam] : events) {
            if (n <= prev || !(lam > 0.0 && lam < 1.0))
                throw precondition_error("product envelope events must be increasing with "
                                         "factors in (0,1)");
            prev = n;
            running *= lam;
            prefix.push_back(running);
        }
        return EnvelopeSpec(Product{std::move(events), std::move(prefix)});
    }
    /// The canonical envelope of a schedule: staircase for periodic ones,
    /// factor product otherwise (materialized up to `horizon`).
    static EnvelopeSpec for_schedule(const EventSchedule &sched, long horizon) {
        if (auto p = sched.periodic_params()) {
            const auto [lambda, period, first] = *p;
            return periodic_floor(lambda, period, first);
        }
        return product(sched.events_up_to(horizon));
    }

    [[nodiscard]] long start() const {
        if (const auto *p = std::get_if<PeriodicFloor>(&form_))
            return p->start;
        return std::get<Product>(form_).events.front().first;
    }

    [[nodiscard]] double value(long n) const {
        if (n < start())
            throw precondition_error("envelope undefined before its first event (n=" +
                                     std::to_string(n) + " < " + std::to_string(start()) + ")");
        if (const auto *p = std::get_if<PeriodicFloor>(&form_)) {
            const long k = 1 + (n - p->start) / p->period;
            return std::pow(p->lambda, static_cast<double>(k));
        }
        const auto &pr = std::get<Product>(form_);
        // Largest k with n_k ≤ n.
        std::size_t lo = 0, hi = pr.events.size();
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (pr.events[mid].first <= n)
                lo = mid + 1;
            else
                hi = mid;
        }
        return pr.prefix[lo - 1];
    }

    /// Asymptotic per-step slope of ln(value): ln(λ)/period for the periodic
    /// staircase; undefined for general products.
    [[nodiscard]] std::optional<double> per_step_log_slope() const {
        if (const auto *p = std::get_if<PeriodicFloor>(&form_))
            return std::log(p->lambda) / static_cast<double>(p->period);
        return std::nullopt;
    }

    [[nodiscard]] bool is_periodic_floor() const {
        return std::holds_alternative<PeriodicFloor>(form_);
    }
    /// (λ, period, start) when staircase-shaped.
    [[nodiscard]] std::optional<std::tuple<double, long, long>> staircase_params() const {
        if (const auto *p = std::get_if<PeriodicFloor>(&form_))
            return std::make_tuple(p->lambda, p->period, p->start);
        return std::nullopt;
    }
    /// The (n_k, λ_k) list when product-shaped.
    [[nodiscard]] std::optional<std::vector<std::pair<long, double>>> product_events() const {
        if (const auto *p = std::get_if<Product>(&form_))
            return p->events;
        return std::nullopt;
    }
};

// ---------------------------------------------------------------------------
// Orbits
// ---------------------------------------------------------------------------

struct OrbitStep {
    long n = 0;
    Vec x;
    double dist = 0.0; ///< ‖x_n − z‖, clamped to 0 below kDistClamp
    bool event = false;
};

struct OrbitTrace {
    std::vector<OrbitStep> steps; ///< steps[0] is the start (n = 0)
    Vec anchor_point;             ///< the common fixed point z
    std::optional<EventSchedule> schedule;

    [[nodiscard]] double reference_dist() const { return steps.front().dist; }
    [[nodiscard]] const OrbitStep &at(long n) const { return steps.at(static_cast<size_t>(n)); }
};

/// Yields the map applied at step n (x_{n-1} ↦ x_n), n ≥ 1.
using StepSource = std::function<const OperatorMap &(long)>;

struct RunOptions {
    bool waive_fixed_check = false; ///< skip the upfront z-fixedness sweep
    double fixed_tol = 1e-9;
    std::optional<EventSchedule> schedule; ///< stamps event flags on the trace
};

/// Records the orbit x_n = T_n(x_{n-1}) together with distances to z. Before
/// iterating, verifies that z is fixed by every step map on the horizon
/// (refusing otherwise), so recorded distances genuinely measure approach to
/// a common fixed point rather than to an arbitrary reference.
inline OrbitTrace run_orbit(const StepSource &map_at, const Vec &x0, const Vec &z, long n_max,
                            const RunOptions &opt = {}) {
    if (n_max < 0 || n_max > kOrbitCap)
        throw precondition_error("orbit length must lie in [0, " + std::to_string(kOrbitCap) + "]");
    if (x0.size() != z.size())
        throw precondition_error("run_orbit: start/anchor dimension mismatch");
    if (!opt.waive_fixed_check)
        for (long n = 1; n <= n_max; ++n) {
            const double res = vec_dist(map_at(n).apply(z), z);
            if (res > opt.fixed_tol)
                throw precondition_error("anchor point is not fixed by the step-" +
                                         std::to_string(n) + " map (residual " +
                                         std::to_string(res) + ")");
        }

    OrbitTrace trace;
    trace.anchor_point = z;
    trace.schedule = opt.schedule;
    trace.steps.reserve(static_cast<std::size_t>(n_max) + 1);
    const auto clamp = [](double d) { return d < kDistClamp ? 0.0 : d; };
    Vec x = x0;
    trace.steps.push_back({0, x, clamp(vec_dist(x, z)), false});
    for (long n = 1; n <= n_max; ++n) {
        x = map_at(n).apply(x);
        const bool ev = opt.schedule && opt.schedule->is_event(n);
        trace.steps.push_back({n, x, clamp(vec_dist(x, z)), ev});
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Block certificates
// ---------------------------------------------------------------------------

/// Auditable contraction certificate for one inter-event block: the maps for
/// steps (from, to] compose to a λ-contraction around any common fixed point.
struct BlockCertificate {
    int index = 0;     ///< k (1-based)
    long from = 0;     ///< n_{k-1} (0 before the first event)
    long to = 0;       ///< n_k
    double target = 0; ///< λ_k
    double certificate = 0;
    std::string method; ///< "composed-spectral" or "factor-product"
    bool satisfied = false;
};

/// Certifies every complete block with n_k ≤ horizon. The certificate is the
/// sharper of (a) the product of per-map certified moduli and (b) the exact
/// spectral norm of the composed linear part when every map in the block is
/// affine.
inline std::vector<BlockCertificate> block_certify(const StepSource &map_at,
                                                   const EventSchedule &sched, long horizon) {
    std::vector<BlockCertificate> out;
    long prev = 0;
    int k = 0;
    for (const auto &[n_k, lambda_k] : sched.events_up_to(horizon)) {
        ++k;
        double product = 1.0;
        bool all_affine = true;
        std::optional<RealMatrix> composed;
        for (long n = prev + 1; n <= n_k; ++n) {
            const OperatorMap &t = map_at(n);
            product *= t.lipschitz_certified();
            if (all_affine) {
                if (auto form = t.affine_form()) {
                    composed = composed ? (form->A * *composed) : form->A;
                } else {
                    all_affine = false;
                    composed.reset();
                }
            }
        }
        BlockCertificate cert;
        cert.index = k;
        cert.from = prev;
        cert.to = n_k;
        cert.target = lambda_k;
        if (all_affine && composed) {
            const double spectral = composed->spectral_norm();
            if (spectral <= product) {
                cert.certificate = spectral;
                cert.method = "composed-spectral";
            } else {
                cert.certificate = product;
                cert.method = "factor-product";
            }
        } else {
            cert.certificate = product;
            cert.method = "factor-product";
        }
        cert.satisfied = cert.certificate <= lambda_k + kCertSlack;
        out.push_back(std::move(cert));
        prev = n_k;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Envelope verification
// ---------------------------------------------------------------------------

struct EnvelopeReport {
    bool certified = false; ///< dist(n) ≤ value(n)·dist(0) + tol on all checked n
    std::optional<long> first_violation;
    double max_overshoot = 0.0; ///< max of dist − bound over checked steps (≤ 0 when slack)
    bool equality_at_events = false;
    bool equality_everywhere = false;
    double reference_dist = 0.0;
    std::optional<double> measured_log_slope; ///< per-step ln(dist) slope, event-to-event when
                                              ///< two events exist, else over the checked range
    long checked = 0;
};

/// Verifies a recorded orbit against an envelope. Steps before the first
/// event are exempt (no decay is promised there); equality flags report
/// whether the bound is met with equality — the tightness construction does
/// so at every checked step.
inline EnvelopeReport envelope_check(const OrbitTrace &trace, const EnvelopeSpec &env,
                                     double tol = 1e-9, double eq_tol = kEqualityTol) {
    EnvelopeReport rep;
    if (trace.steps.empty())
        throw precondition_error("envelope_check: empty trace");
    rep.reference_dist = trace.reference_dist();
    rep.max_overshoot = -std::numeric_limits<double>::infinity();
    bool events_all_equal = true, all_equal = true;
    long events_seen = 0;
    std::optional<std::pair<long, double>> first_pos, last_pos;
    std::optional<std::pair<long, double>> first_event_pos, last_event_pos;
    for (const auto &step : trace.steps) {
        if (step.n < env.start())
            continue;
        const double bound = env.value(step.n) * rep.reference_dist;
        const double gap = step.dist - bound;
        rep.max_overshoot = std::max(rep.max_overshoot, gap);
        if (gap > tol && !rep.first_violation)
            rep.first_violation = step.n;
        if (std::abs(gap) > eq_tol)
            all_equal = false;
        if (step.event) {
            ++events_seen;
            if (std::abs(gap) > eq_tol)
                events_all_equal = false;
        }
        if (step.dist > 0.0) {
            if (!first_pos)
                first_pos = {step.n, step.dist};
            last_pos = {step.n, step.dist};
            if (step.event) {
                if (!first_event_pos)
                    first_event_pos = {step.n, step.dist};
                last_event_pos = {step.n, step.dist};
            }
        }
        ++rep.checked;
    }
    if (rep.checked == 0) {
        rep.max_overshoot = 0.0;
        rep.certified = true;
        return rep;
    }
    rep.certified = !rep.first_violation.has_value();
    rep.equality_at_events = events_seen > 0 && events_all_equal;
    rep.equality_everywhere = all_equal;
    // Decay is only promised at events, so measure the slope event-to-event
    // when two are available; trailing steps on the final plateau would
    // otherwise dilute it.
    const auto &lo = (first_event_pos && last_event_pos &&
                      last_event_pos->first > first_event_pos->first)
                         ? first_event_pos
                         : first_pos;
    const auto &hi = (first_event_pos && last_event_pos &&
                      last_event_pos->first > first_event_pos->first)
                         ? last_event_pos
                         : last_pos;
    if (lo && hi && hi->first > lo->first)
        rep.measured_log_slope =
            (std::log(hi->second) - std::log(lo->second)) /
            static_cast<double>(hi->first - lo->first);
    return rep;
}

// ---------------------------------------------------------------------------
// Aggregate slope bounds
// ---------------------------------------------------------------------------

/// Aggregate decay rate earned by the first K events: the guaranteed bound on
/// (1/n_K)·ln(dist(n_K)/dist(0)) is Σ_{j≤K} ln λ_j / n_K. When the inter-event
/// gaps are all equal to M, this is also (1/M)·mean(ln λ_j).
struct SlopeBounds {
    double aggregate = 0.0; ///< Σ ln λ_j / n_K (negative)
    std::optional<double> uniform_gap_form;
    int events_used = 0;
    long horizon = 0; ///< n_K
};

inline SlopeBounds slope_bounds(const EventSchedule &sched, int max_events) {
    if (max_events < 1)
        throw precondition_error("slope_bounds: need at least one event");
    // Materialize the first max_events events; probe geometrically.
    std::vector<std::pair<long, double>> ev;
    long horizon = 16;
    while (true) {
        ev = sched.events_up_to(horizon);
        if (static_cast<long>(ev.size()) >= max_events || horizon > (1L << 60))
            break;
        horizon *= 2;
    }
    if (static_cast<long>(ev.size()) < max_events)
        throw precondition_error("slope_bounds: schedule has fewer events than requested");
    ev.resize(static_cast<std::size_t>(max_events));
    SlopeBounds sb;
    sb.events_used = max_events;
    sb.horizon = ev.back().first;
    double log_sum = 0.0;
    for (const auto &[n, lam] : ev)
        log_sum += std::log(lam);
    sb.aggregate = log_sum / static_cast<double>(sb.horizon);
    bool uniform = true;
    long prev = 0, gap = ev.front().first;
    for (const auto &[n, lam] : ev) {
        if (n - prev != gap)
            uniform = false;
        prev = n;
    }
    if (uniform)
        sb.uniform_gap_form =
            log_sum / (static_cast<double>(gap) * static_cast<double>(max_events));
    return sb;
}

// ---------------------------------------------------------------------------
// Power-contraction index
// ---------------------------------------------------------------------------

/// Searches for the least N with a certified bound ‖T^N‖ ≤ target. Requires a
/// nonexpansive base map; with that, any later power inherits the bound, and
/// the tail entries of `certificates` confirm it numerically on the exact
/// (affine) path.
struct PowerContractionReport {
    std::optional<int> index;
    std::vector<double> certificates; ///< certificates[p-1] certifies the p-th power
    std::string method;               ///< "composed-spectral" or "factor-product"
    double target = 0.0;
    bool tail_consistent = false; ///< certificates stay ≤ target beyond the index
};

inline PowerContractionReport power_contraction_index(const OperatorMap &op, double target,
                                                      int max_power = 16) {
    if (!(target > 0.0 && target < 1.0))
        throw precondition_error("power_contraction_index: target must lie in (0,1)");
    if (max_power < 1)
        throw precondition_error("power_contraction_index: max_power must be >= 1");
    const double base = op.lipschitz_certified();
    if (!(base <= 1.0 + 1e-12))
        throw precondition_error("power_contraction_index: base map is not certified "
                                 "nonexpansive (certificate " +
                                 std::to_string(base) + ")");
    PowerContractionReport rep;
    rep.target = target;
    const auto form = op.affine_form();
    rep.method = form ? "composed-spectral" : "factor-product";
    std::optional<RealMatrix> power;
    for (int p = 1; p <= max_power; ++p) {
        double cert;
        if (form) {
            power = power ? (form->A * *power) : form->A;
            cert = power->spectral_norm();
        } else {
            cert = std::pow(base, p);
        }
        rep.certificates.push_back(cert);
        if (!rep.index && cert <= target + kCertSlack)
            rep.index = p;
    }
    if (rep.index) {
        rep.tail_consistent = true;
        for (std::size_t p = static_cast<std::size_t>(*rep.index); p < rep.certificates.size(); ++p)
            if (rep.certificates[p] > target + kCertSlack)
                rep.tail_consistent = false;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Single-map geometric rate check
// ---------------------------------------------------------------------------

/// Audits the claimed rate dist(n) ≤ λ^{n−N+1}·dist(0) for a map whose N-th
/// power is certified λ-contractive. The claim is exact for N = 1 (plain
/// geometric convergence); for N ≥ 2 it generally fails, and the report also
/// verifies the correct replacement dist(n) ≤ λ^{⌊n/N⌋}·dist(0).
struct ClassicalRateReport {
    bool refused = false;
    std::string reason;
    int power = 0;
    double lambda = 0.0;
    Vec fixed_point;
    double fixed_residual = 0.0;
    bool claimed_rate_holds = false;
    std::optional<long> claimed_first_violation;
    double claimed_max_overshoot = 0.0;
    bool claimed_equality = false; ///< bound met with equality at every n ≥ N
    bool floor_rate_holds = false; ///< the ⌊n/N⌋ replacement bound
    OrbitTrace trace;
};

inline ClassicalRateReport classical_rate_check(const OperatorMap &op, int power, double lambda,
                                                const Vec &x0, long n_max,
                                                std::optional<Vec> fixed_point = std::nullopt,
                                                double tol = 1e-9) {
    if (power < 1)
        throw precondition_error("classical_rate_check: power must be >= 1");
    if (!(lambda > 0.0 && lambda < 1.0))
        throw precondition_error("classical_rate_check: lambda must lie in (0,1)");
    ClassicalRateReport rep;
    rep.power = power;
    rep.lambda = lambda;

    if (!(op.lipschitz_certified() <= 1.0 + 1e-12)) {
        rep.refused = true;
        rep.reason = "base map is not certified nonexpansive (certificate " +
                     std::to_string(op.lipschitz_certified()) + ")";
        return rep;
    }
    const auto powers = power_contraction_index(op, lambda, power);
    if (powers.certificates[static_cast<std::size_t>(power) - 1] > lambda + kCertSlack) {
        rep.refused = true;
        rep.reason = "power-" + std::to_string(power) + " certificate " +
                     std::to_string(powers.certificates[static_cast<std::size_t>(power) - 1]) +
                     " exceeds lambda " + std::to_string(lambda);
        return rep;
    }

    if (!fixed_point) {
        const FixedPointSet f = op.fixed_points();
        if (f.kind != FixedPointSet::Kind::Point) {
            rep.refused = true;
            rep.reason = "no unique fixed point derivable and none supplied";
            return rep;
        }
        fixed_point = f.point;
    }
    rep.fixed_point = *fixed_point;
    rep.fixed_residual = vec_dist(op.apply(*fixed_point), *fixed_point);
    if (rep.fixed_residual > tol) {
        rep.refused = true;
        rep.reason = "supplied point is not fixed (residual " +
                     std::to_string(rep.fixed_residual) + ")";
        return rep;
    }

    rep.trace = run_orbit([&](long) -> const OperatorMap & { return op; }, x0, *fixed_point, n_max,
                          RunOptions{true, tol, std::nullopt});
    const double d0 = rep.trace.reference_dist();
    rep.claimed_rate_holds = true;
    rep.claimed_equality = true;
    rep.floor_rate_holds = true;
    rep.claimed_max_overshoot = -std::numeric_limits<double>::infinity();
    for (const auto &step : rep.trace.steps) {
        const long n = step.n;
        if (n >= power) {
            const double claimed =
                std::pow(lambda, static_cast<double>(n - power + 1)) * d0;
            const double gap = step.dist - claimed;
            rep.claimed_max_overshoot = std::max(rep.claimed_max_overshoot, gap);
            if (gap > tol) {
                rep.claimed_rate_holds = false;
                if (!rep.claimed_first_violation)
                    rep.claimed_first_violation = n;
            }
            if (std::abs(gap) > kEqualityTol * std::max(1.0, d0))
                rep.claimed_equality = false;
        }
        const double floor_bound = std::pow(lambda, static_cast<double>(n / power)) * d0;
        if (step.dist - floor_bound > tol)
            rep.floor_rate_holds = false;
    }
    if (rep.claimed_max_overshoot == -std::numeric_limits<double>::infinity())
        rep.claimed_max_overshoot = 0.0;
    return rep;
}

// ---------------------------------------------------------------------------
// Anchored convergence on an invariant subspace
// ---------------------------------------------------------------------------

/// Convergence of the anchored component P·x_n for an affine map commuting
/// with the orthogonal projection P. The map is compressed to ran(P); a
/// certified contraction there yields geometric convergence of P·x_n to the
/// unique restricted fixed point even when the full map has a continuum of
/// fixed points outside ran(P). Non-commuting inputs are refused with the
/// offending commutator norm.
struct AnchoredReport {
    bool refused = false;
    std::string reason;
    std::optional<double> commutator_norm; ///< ‖AP − PA‖ once computed
    std::size_t restricted_rank = 0;
    double restricted_certificate = 0.0; ///< ‖(compressed A)^N‖
    Vec fixed_point;                     ///< restricted fixed point, embedded in R^n
    double fixed_residual = 0.0;
    bool rate_holds = false;    ///< ‖P x_n − z‖ ≤ λ^{⌊n/N⌋}·‖P x_0 − z‖
    bool rate_equality = false; ///< met with equality at every step
    double max_overshoot = 0.0;
    std::size_t global_fixed_dim = 0;        ///< dim null(I − A) over the whole space
    bool offaxis_fixed_verified = false;     ///< sampled global fixed points stay fixed
    OrbitTrace projected_trace;              ///< dist column is ‖P x_n − z‖
};

inline AnchoredReport anchored_run(const OperatorMap &op, const ProjectionOp &anchor,
                                   const Vec &x0, int power, double lambda, long n_max,
                                   double tol = 1e-9) {
    if (power < 1 || !(lambda > 0.0 && lambda < 1.0))
        throw precondition_error("anchored_run: need power >= 1 and lambda in (0,1)");
    AnchoredReport rep;
    const std::size_t n = op.dim();
    if (anchor.dim() != n || x0.size() != n) {
        rep.refused = true;
        rep.reason = "dimension mismatch between map, anchor projection, and start point";
        return rep;
    }
    const auto form = op.affine_form();
    if (!form) {
        rep.refused = true;
        rep.reason = "anchored analysis requires an affine map (kind '" + op.kind_name() + "')";
        return rep;
    }

    // Realify the projection matrix.
    RealMatrix p(n);
    {
        const ComplexMatrix &pm = anchor.matrix();
        double imag = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                imag = std::max(imag, std::abs(pm(i, j).imag()));
                p(i, j) = pm(i, j).real();
            }
        if (imag > tol) {
            rep.refused = true;
            rep.reason = "anchor projection is not real (imaginary mass " + std::to_string(imag) +
                         ")";
            return rep;
        }
    }

    const double comm = (form->A * p - p * form->A).spectral_norm();
    rep.commutator_norm = comm;
    if (comm > tol) {
        rep.refused = true;
        rep.reason = "map does not commute with the anchor projection (commutator norm " +
                     std::to_string(comm) + ")";
        return rep;
    }
    {
        Vec pb = p.apply(form->b);
        double leak = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            leak += (form->b[i] - pb[i]) * (form->b[i] - pb[i]);
        if (std::sqrt(leak) > tol) {
            rep.refused = true;
            rep.reason = "offset component leaves the anchored subspace (leak " +
                         std::to_string(std::sqrt(leak)) + ")";
            return rep;
        }
    }

    // Orthonormal real basis of ran(P) from the spectral decomposition.
    std::vector<Vec> basis;
    {
        const auto eig = hermitian_eigendecomposition(anchor.matrix());
        for (std::size_t j = 0; j < n; ++j) {
            if (eig.values[j] < 0.5)
                continue;
            auto v = detail::realify_phase(eig.vector(j));
            if (!v) {
                rep.refused = true;
                rep.reason = "anchored basis realification failed";
                return rep;
            }
            const double r = vec_norm(*v);
            for (auto &e : *v)
                e /= r;
            basis.push_back(std::move(*v));
        }
    }
    rep.restricted_rank = basis.size();
    if (basis.empty()) {
        rep.refused = true;
        rep.reason = "anchor projection has rank zero";
        return rep;
    }
    const std::size_t r = basis.size();

    // Compressed map y ↦ M_c y + b_c on ran(P) coordinates.
    RealMatrix mc(r);
    Vec bc(r, 0.0);
    for (std::size_t aidx = 0; aidx < r; ++aidx) {
        const Vec av = form->A.apply(basis[aidx]);
        for (std::size_t bidx = 0; bidx < r; ++bidx)
            mc(bidx, aidx) = vec_dot(basis[bidx], av);
        bc[aidx] = vec_dot(basis[aidx], form->b);
    }
    RealMatrix mc_pow = mc;
    for (int q = 1; q < power; ++q)
        mc_pow = mc * mc_pow;
    rep.restricted_certificate = mc_pow.spectral_norm();
    if (rep.restricted_certificate > lambda + kCertSlack) {
        rep.refused = true;
        rep.reason = "restricted certificate " + std::to_string(rep.restricted_certificate) +
                     " exceeds lambda " + std::to_string(lambda);
        return rep;
    }

    // Unique restricted fixed point: (I − M_c) y = b_c, then embed.
    const auto y = solve_linear(RealMatrix::identity(r) - mc, bc);
    if (!y) {
        rep.refused = true;
        rep.reason = "restricted resolvent unexpectedly singular";
        return rep;
    }
    Vec z(n, 0.0);
    for (std::size_t bidx = 0; bidx < r; ++bidx)
        for (std::size_t i = 0; i < n; ++i)
            z[i] += (*y)[bidx] * basis[bidx][i];
    rep.fixed_point = z;
    rep.fixed_residual = vec_dist(op.apply(z), z);

    // Orbit of the anchored component.
    rep.projected_trace.anchor_point = z;
    rep.projected_trace.schedule =
        EventSchedule::periodic(lambda, power, power);
    const auto clamp = [](double d) { return d < kDistClamp ? 0.0 : d; };
    Vec x = x0;
    rep.projected_trace.steps.push_back({0, x, clamp(vec_dist(p.apply(x), z)), false});
    for (long step = 1; step <= n_max; ++step) {
        x = op.apply(x);
        rep.projected_trace.steps.push_back({step, x, clamp(vec_dist(p.apply(x), z)),
                                             rep.projected_trace.schedule->is_event(step)});
    }
    const double d0 = rep.projected_trace.reference_dist();
    rep.rate_holds = true;
    rep.rate_equality = true;
    rep.max_overshoot = -std::numeric_limits<double>::infinity();
    for (const auto &step : rep.projected_trace.steps) {
        const double bound = std::pow(lambda, static_cast<double>(step.n / power)) * d0;
        const double gap = step.dist - bound;
        rep.max_overshoot = std::max(rep.max_overshoot, gap);
        if (gap > tol)
            rep.rate_holds = false;
        if (std::abs(gap) > kEqualityTol * std::max(1.0, d0))
            rep.rate_equality = false;
    }

    // Global fixed structure of the full map: dim null(I − A), with sampled
    // verification that points along the null directions really stay fixed.
    {
        const RealMatrix g = RealMatrix::identity(n) - form->A;
        const auto eig = hermitian_eigendecomposition((g.transpose() * g).to_complex());
        std::vector<Vec> null_dirs;
        for (std::size_t j = 0; j < n; ++j)
            if (std::abs(eig.values[j]) <= 1e-12) {
                auto v = detail::realify_phase(eig.vector(j));
                if (v)
                    null_dirs.push_back(std::move(*v));
            }
        rep.global_fixed_dim = null_dirs.size();
        rep.offaxis_fixed_verified = true;
        for (const auto &w : null_dirs)
            for (const double c : {1.0, -2.5, 7.0}) {
                Vec pnt = z;
                for (std::size_t i = 0; i < n; ++i)
                    pnt[i] += c * w[i];
                const double res = vec_dist(op.apply(pnt), pnt);
                if (res > 1e-8 * std::max(1.0, vec_norm(pnt)))
                    rep.offaxis_fixed_verified = false;
            }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Tight constructions
// ---------------------------------------------------------------------------

/// A worked orbit construction that meets its envelope with equality at every
/// step on/after the first event: plane rotations (isometries) between events
/// and a pure λ·I scaling at each event.
struct TightnessScenario {
    std::vector<OperatorMap> ops; ///< per-step maps (one period when cyclic)
    bool cyclic = false;
    EventSchedule schedule = EventSchedule::periodic(0.5, 1);
    EnvelopeSpec envelope = EnvelopeSpec::periodic_floor(0.5, 1, 1);
    Vec x0{1.0, 0.0};
    Vec z{0.0, 0.0};

    [[nodiscard]] const OperatorMap &at(long n) const {
        if (n < 1)
            throw precondition_error("step index must be >= 1");
        const std::size_t len = ops.size();
        if (cyclic)
            return ops[static_cast<std::size_t>((n - 1) % static_cast<long>(len))];
        if (n > static_cast<long>(len))
            throw precondition_error("step index beyond the constructed horizon");
        return ops[static_cast<std::size_t>(n - 1)];
    }
    [[nodiscard]] StepSource source() const {
        return [this](long n) -> const OperatorMap & { return at(n); };
    }
    [[nodiscard]] long horizon() const {
        return cyclic ? kOrbitCap : static_cast<long>(ops.size());
    }
};

/// period−1 quarter-turn rotations followed by λ·I, repeated forever. The
/// orbit of (1,0) around z = 0 realizes dist(n) = λ^{⌊n/period⌋} exactly.
inline TightnessScenario tightness_periodic(double lambda, long period) {
    if (!(lambda > 0.0 && lambda < 1.0) || period < 1)
        throw precondition_error("tightness_periodic: need lambda in (0,1), period >= 1");
    TightnessScenario sc;
    const double quarter = 2.0 * std::atan(1.0); // π/2
    for (long s = 1; s < period; ++s)
        sc.ops.push_back(OperatorMap::rotation(quarter));
    sc.ops.push_back(OperatorMap::scaling(2, lambda));
    sc.cyclic = true;
    sc.schedule = EventSchedule::periodic(lambda, period);
    sc.envelope = EnvelopeSpec::periodic_floor(lambda, period, period);
    return sc;
}

/// Blocks (λ_k, N_k): N_k − 1 rotations then λ_k·I per block; one pass, not
/// cyclic. Realizes dist(n_K) = λ_1⋯λ_K exactly.
inline TightnessScenario tightness_heterogeneous(
    const std::vector<std::pair<double, long>> &blocks) {
    TightnessScenario sc;
    sc.schedule = EventSchedule::blocks(blocks);
    const double quarter = 2.0 * std::atan(1.0);
    for (const auto &[lam, len] : blocks) {
        if (!(lam > 0.0 && lam < 1.0) || len < 1)
            throw precondition_error("tightness_heterogeneous: bad block parameters");
        for (long s = 1; s < len; ++s)
            sc.ops.push_back(OperatorMap::rotation(quarter));
        sc.ops.push_back(OperatorMap::scaling(2, lam));
    }
    sc.cyclic = false;
    sc.envelope = EnvelopeSpec::for_schedule(sc.schedule, sc.horizon());
    return sc;
}

// ---------------------------------------------------------------------------
// Uniqueness of the common fixed point
// ---------------------------------------------------------------------------

/// Two candidate common fixed points of a recurring family must coincide once
/// one period composes to a strict contraction; `consistent` is false exactly
/// when the premises verify but the candidates still differ.
struct UniquenessReport {
    std::vector<double> w_residuals, z_residuals;
    bool w_fixed = false, z_fixed = false;
    double period_certificate = 0.0;
    bool contraction_present = false;
    double separation = 0.0;
    bool coincide = false;
    bool consistent = false;
};

inline UniquenessReport uniqueness_witness(const std::vector<OperatorMap> &period, const Vec &w,
                                           const Vec &z, double tol = 1e-9) {
    if (period.empty())
        throw precondition_error("uniqueness_witness: empty period");
    UniquenessReport rep;
    rep.w_fixed = rep.z_fixed = true;
    for (const auto &t : period) {
        rep.w_residuals.push_back(vec_dist(t.apply(w), w));
        rep.z_residuals.push_back(vec_dist(t.apply(z), z));
        rep.w_fixed = rep.w_fixed && rep.w_residuals.back() <= tol;
        rep.z_fixed = rep.z_fixed && rep.z_residuals.back() <= tol;
    }
    double product = 1.0;
    bool all_affine = true;
    std::optional<RealMatrix> composed;
    for (const auto &t : period) {
        product *= t.lipschitz_certified();
        if (all_affine) {
            if (auto form = t.affine_form())
                composed = composed ? (form->A * *composed) : form->A;
            else {
                all_affine = false;
                composed.reset();
            }
        }
    }
    rep.period_certificate = product;
    if (composed)
        rep.period_certificate = std::min(rep.period_certificate, composed->spectral_norm());
    rep.contraction_present = rep.period_certificate < 1.0 - kCertSlack;
    rep.separation = vec_dist(w, z);
    rep.coincide = rep.separation <= tol * std::max({1.0, vec_norm(w), vec_norm(z)});
    rep.consistent =
        !(rep.w_fixed && rep.z_fixed && rep.contraction_present && !rep.coincide);
    return rep;
}

} // namespace anchorlab

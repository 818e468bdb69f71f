#include <anchorlab/iteration.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using namespace anchorlab;

namespace {
const double kPi = std::acos(-1.0);

OrbitTrace trace_from_dists(const std::vector<double> &dists, const std::vector<long> &events) {
    OrbitTrace t;
    for (std::size_t i = 0; i < dists.size(); ++i) {
        const long n = static_cast<long>(i);
        const bool ev = std::find(events.begin(), events.end(), n) != events.end();
        t.steps.push_back({n, {}, dists[i], ev});
    }
    return t;
}
} // namespace

TEST_CASE("event schedules enumerate their events") {
    const EventSchedule periodic = EventSchedule::periodic(0.8, 4);
    CHECK(periodic.is_event(4));
    CHECK(periodic.is_event(8));
    CHECK_FALSE(periodic.is_event(3));
    CHECK_FALSE(periodic.is_event(0));
    const auto evs = periodic.events_up_to(12);
    REQUIRE(evs.size() == 3);
    CHECK(evs[0].first == 4);
    CHECK(evs[2].first == 12);
    CHECK(evs[1].second == Catch::Approx(0.8));
    CHECK(periodic.count_up_to(11) == 2);
    REQUIRE(periodic.first_event().has_value());
    CHECK(*periodic.first_event() == 4);
    CHECK(periodic.is_periodic());

    const EventSchedule blocks = EventSchedule::blocks({{0.5, 1}, {0.9, 4}, {0.7, 2}});
    const auto bev = blocks.events_up_to(100);
    REQUIRE(bev.size() == 3);
    CHECK(bev[0] == std::pair<long, double>{1, 0.5});
    CHECK(bev[1] == std::pair<long, double>{5, 0.9});
    CHECK(bev[2] == std::pair<long, double>{7, 0.7});
    CHECK_FALSE(blocks.is_periodic());

    const EventSchedule listed = EventSchedule::from_events({{3, 0.6}, {10, 0.9}});
    CHECK(listed.factor_at(3).has_value());
    CHECK_FALSE(listed.factor_at(4).has_value());

    CHECK_THROWS_AS(EventSchedule::periodic(1.2, 4), precondition_error);
    CHECK_THROWS_AS(EventSchedule::periodic(0.8, 0), precondition_error);
    CHECK_THROWS_AS(EventSchedule::from_events({{10, 0.9}, {3, 0.6}}), precondition_error);
}

TEST_CASE("envelope values follow the staircase and the product forms") {
    const EnvelopeSpec stair = EnvelopeSpec::periodic_floor(0.8, 4, 4);
    CHECK(stair.start() == 4);
    CHECK_THROWS_AS(stair.value(3), precondition_error);
    CHECK(stair.value(4) == Catch::Approx(0.8).margin(1e-15));
    CHECK(stair.value(7) == Catch::Approx(0.8).margin(1e-15));
    CHECK(stair.value(8) == Catch::Approx(0.64).margin(1e-15));
    CHECK(stair.value(28) == Catch::Approx(std::pow(0.8, 7)).margin(1e-15));
    REQUIRE(stair.per_step_log_slope().has_value());
    CHECK(*stair.per_step_log_slope() == Catch::Approx(std::log(0.8) / 4.0).margin(1e-15));

    const EnvelopeSpec prod = EnvelopeSpec::product({{1, 0.5}, {5, 0.9}, {7, 0.7}});
    CHECK(prod.start() == 1);
    CHECK(prod.value(1) == Catch::Approx(0.5).margin(1e-15));
    CHECK(prod.value(4) == Catch::Approx(0.5).margin(1e-15)); // plateau between events
    CHECK(prod.value(5) == Catch::Approx(0.45).margin(1e-15));
    CHECK(prod.value(7) == Catch::Approx(0.315).margin(1e-15));
    CHECK(prod.value(100) == Catch::Approx(0.315).margin(1e-15));
    CHECK_THROWS_AS(prod.value(0), precondition_error);

    const EnvelopeSpec derived = EnvelopeSpec::for_schedule(EventSchedule::periodic(0.8, 4), 100);
    CHECK(derived.is_periodic_floor());
    CHECK(derived.value(12) == Catch::Approx(std::pow(0.8, 3)).margin(1e-15));
}

TEST_CASE("orbit runner enforces the anchor and follows the contraction") {
    const OperatorMap half = OperatorMap::scaling(2, 0.5);
    const auto source = [&](long) -> const OperatorMap & { return half; };
    const OrbitTrace t = run_orbit(source, {1.0, 0.0}, {0.0, 0.0}, 10,
                                   RunOptions{false, 1e-9, EventSchedule::periodic(0.5, 1)});
    REQUIRE(t.steps.size() == 11);
    for (long n = 0; n <= 10; ++n)
        CHECK(t.at(n).dist == Catch::Approx(std::pow(0.5, n)).margin(1e-15));
    CHECK(t.at(1).event);
    CHECK_FALSE(t.at(0).event);

    // z = (1, 1) is not fixed by the halving map: refuse up front.
    CHECK_THROWS_WITH(run_orbit(source, {1.0, 0.0}, {1.0, 1.0}, 5),
                      Catch::Matchers::ContainsSubstring("anchor point is not fixed"));
    // With the check waived the orbit still runs.
    RunOptions waived;
    waived.waive_fixed_check = true;
    CHECK(run_orbit(source, {1.0, 0.0}, {1.0, 1.0}, 5, waived).steps.size() == 6);

    CHECK_THROWS_AS(run_orbit(source, {1.0, 0.0}, {0.0, 0.0}, -1), precondition_error);
}

TEST_CASE("orbit distances are non-increasing under nonexpansive steps") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> g;
    const std::vector<OperatorMap> steps = {
        OperatorMap::rotation(0.3), OperatorMap::ball_projection({0.0, 0.0}, 3.0),
        OperatorMap::scaling(2, 0.95), OperatorMap::halfspace_projection({1.0, 0.0}, 5.0)};
    const auto source = [&](long n) -> const OperatorMap & {
        return steps[static_cast<std::size_t>(n - 1) % steps.size()];
    };
    for (int rep = 0; rep < 10; ++rep) {
        const Vec x0 = {g(rng) * 3, g(rng) * 3};
        const OrbitTrace t = run_orbit(source, x0, {0.0, 0.0}, 40);
        for (std::size_t i = 1; i < t.steps.size(); ++i)
            CHECK(t.steps[i].dist <= t.steps[i - 1].dist + 1e-10);
    }
}

TEST_CASE("envelope check flags the first violating step") {
    const EnvelopeSpec env = EnvelopeSpec::periodic_floor(0.5, 2, 2);
    // Compliant: dist halves at each even step.
    const OrbitTrace good = trace_from_dists({1.0, 1.0, 0.5, 0.5, 0.25}, {2, 4});
    const EnvelopeReport ok = envelope_check(good, env);
    CHECK(ok.certified);
    CHECK(ok.equality_at_events);
    CHECK(ok.equality_everywhere);
    CHECK_FALSE(ok.first_violation.has_value());

    // Too slow from n = 4 onward.
    const OrbitTrace bad = trace_from_dists({1.0, 1.0, 0.5, 0.5, 0.4}, {2, 4});
    const EnvelopeReport viol = envelope_check(bad, env);
    CHECK_FALSE(viol.certified);
    REQUIRE(viol.first_violation.has_value());
    CHECK(*viol.first_violation == 4);
    CHECK(viol.max_overshoot == Catch::Approx(0.15).margin(1e-12));

    // Steps before the envelope start are exempt.
    const OrbitTrace early = trace_from_dists({1.0, 5.0}, {});
    CHECK(envelope_check(early, EnvelopeSpec::periodic_floor(0.5, 2, 2)).certified);

    CHECK_THROWS_AS(envelope_check(OrbitTrace{}, env), precondition_error);
}

TEST_CASE("block certification uses composed spectral norms when available") {
    auto sc = tightness_periodic(0.8, 4);
    const auto certs = block_certify(sc.source(), sc.schedule, 16);
    REQUIRE(certs.size() == 4);
    for (const auto &c : certs) {
        CHECK(c.satisfied);
        CHECK(c.certificate == Catch::Approx(0.8).margin(1e-12));
        CHECK(c.method == "composed-spectral");
        CHECK(c.target == Catch::Approx(0.8));
    }

    // A non-affine factor forces the factor-product fallback.
    const OperatorMap ball = OperatorMap::ball_projection({0.0, 0.0}, 10.0);
    const OperatorMap shrink = OperatorMap::scaling(2, 0.7);
    const std::vector<const OperatorMap *> steps = {&ball, &shrink};
    const auto source = [&](long n) -> const OperatorMap & {
        return *steps[static_cast<std::size_t>((n - 1) % 2)];
    };
    const auto fallback = block_certify(source, EventSchedule::periodic(0.7, 2), 4);
    REQUIRE(fallback.size() == 2);
    CHECK(fallback[0].method == "factor-product");
    CHECK(fallback[0].certificate == Catch::Approx(0.7).margin(1e-12));
    CHECK(fallback[0].satisfied);
}

TEST_CASE("aggregate slope bounds") {
    const SlopeBounds uniform = slope_bounds(EventSchedule::periodic(0.8, 4), 25);
    CHECK(uniform.aggregate == Catch::Approx(std::log(0.8) / 4.0).margin(1e-12));
    REQUIRE(uniform.uniform_gap_form.has_value());
    CHECK(*uniform.uniform_gap_form == Catch::Approx(std::log(0.8) / 4.0).margin(1e-12));
    CHECK(uniform.events_used == 25);

    const SlopeBounds mixed =
        slope_bounds(EventSchedule::blocks({{0.7, 2}, {0.9, 3}, {0.7, 2}, {0.9, 3}}), 4);
    CHECK(mixed.aggregate ==
          Catch::Approx((2.0 * std::log(0.7) + 2.0 * std::log(0.9)) / 10.0).margin(1e-12));
    CHECK_FALSE(mixed.uniform_gap_form.has_value());
}

TEST_CASE("power contraction index for the scaled rotation") {
    const OperatorMap t =
        OperatorMap::compose({OperatorMap::rotation(kPi / 2.0), OperatorMap::scaling(2, 0.8)});

    const PowerContractionReport at07 = power_contraction_index(t, 0.7);
    REQUIRE(at07.index.has_value());
    CHECK(*at07.index == 2);
    CHECK(at07.certificates[0] == Catch::Approx(0.8).margin(1e-12));
    CHECK(at07.certificates[1] == Catch::Approx(0.64).margin(1e-12));
    CHECK(at07.tail_consistent);

    const PowerContractionReport at05 = power_contraction_index(t, 0.5);
    REQUIRE(at05.index.has_value());
    CHECK(*at05.index == 4); // 0.8^3 = 0.512 still misses 0.5
    CHECK(at05.certificates[2] == Catch::Approx(0.512).margin(1e-12));

    // Pure rotations never contract: absent up to 1000 powers.
    const PowerContractionReport rot =
        power_contraction_index(OperatorMap::rotation(kPi / 2.0), 0.9, 1000);
    CHECK_FALSE(rot.index.has_value());
    CHECK(rot.certificates.size() == 1000);
    for (double c : rot.certificates)
        CHECK(c == Catch::Approx(1.0).margin(1e-9));

    CHECK_THROWS_AS(power_contraction_index(OperatorMap::scaling(2, 1.5), 0.9),
                    precondition_error);
}

TEST_CASE("classical rate holds with equality only at power one") {
    const OperatorMap t =
        OperatorMap::compose({OperatorMap::rotation(kPi / 2.0), OperatorMap::scaling(2, 0.8)});

    // Compositions expose no fixed-point structure, so the caller supplies it;
    // without one the audit refuses rather than guessing.
    CHECK(classical_rate_check(t, 1, 0.8, {1.0, 0.0}, 5).refused);

    const ClassicalRateReport n1 = classical_rate_check(t, 1, 0.8, {1.0, 0.0}, 40, Vec{0.0, 0.0});
    CHECK_FALSE(n1.refused);
    CHECK(n1.claimed_rate_holds);
    CHECK(n1.claimed_equality); // dist(n) = 0.8^n exactly
    CHECK(n1.floor_rate_holds);
    CHECK(vec_norm(n1.fixed_point) <= 1e-12);

    // With N = 2 the lambda^(n-N+1) form overreaches: first violation at n = 3,
    // where dist = 0.8^3 = 0.512 > 0.64^2 = 0.4096.
    const ClassicalRateReport n2 = classical_rate_check(t, 2, 0.64, {1.0, 0.0}, 40, Vec{0.0, 0.0});
    CHECK_FALSE(n2.refused);
    CHECK_FALSE(n2.claimed_rate_holds);
    REQUIRE(n2.claimed_first_violation.has_value());
    CHECK(*n2.claimed_first_violation == 3);
    CHECK(n2.floor_rate_holds); // the floor form remains valid

    // Refusals, not crashes, for inconsistent inputs.
    const ClassicalRateReport expansive =
        classical_rate_check(OperatorMap::scaling(2, 1.2), 1, 0.8, {1.0, 0.0}, 5);
    CHECK(expansive.refused);
    CHECK(expansive.reason.find("not certified nonexpansive") != std::string::npos);

    const ClassicalRateReport too_tight = classical_rate_check(t, 1, 0.5, {1.0, 0.0}, 5);
    CHECK(too_tight.refused);
    CHECK(too_tight.reason.find("exceeds lambda") != std::string::npos);

    const ClassicalRateReport bad_fix =
        classical_rate_check(t, 1, 0.8, {1.0, 0.0}, 5, Vec{1.0, 1.0});
    CHECK(bad_fix.refused);
}

TEST_CASE("single-map collapse: every-step events reproduce the classical bound") {
    const OperatorMap t = OperatorMap::scaling(2, 0.8);
    const auto source = [&](long) -> const OperatorMap & { return t; };
    const EventSchedule sched = EventSchedule::periodic(0.8, 1);
    const OrbitTrace trace =
        run_orbit(source, {1.0, 0.0}, {0.0, 0.0}, 30, RunOptions{false, 1e-9, sched});
    const EnvelopeReport rep = envelope_check(trace, EnvelopeSpec::for_schedule(sched, 30));
    CHECK(rep.certified);
    CHECK(rep.equality_everywhere);
    REQUIRE(rep.measured_log_slope.has_value());
    CHECK(*rep.measured_log_slope == Catch::Approx(std::log(0.8)).margin(1e-12));
}

TEST_CASE("anchored run restricts, certifies, and refuses appropriately") {
    SECTION("three-dimensional invariant plane") {
        const OperatorMap op = OperatorMap::linear(
            RealMatrix::from_rows({{1.0, 0.0, 0.0}, {0.0, 0.5, 0.0}, {0.0, 0.0, 0.25}}));
        const ProjectionOp anchor = ProjectionOp::diagonal({0, 1, 1});
        const AnchoredReport rep = anchored_run(op, anchor, {1.0, 2.0, 4.0}, 1, 0.5, 30);
        CHECK_FALSE(rep.refused);
        CHECK(rep.restricted_rank == 2);
        CHECK(rep.restricted_certificate == Catch::Approx(0.5).margin(1e-12));
        CHECK(vec_norm(rep.fixed_point) <= 1e-12);
        CHECK(rep.rate_holds);
        CHECK_FALSE(rep.rate_equality); // two decay speeds inside the plane
        CHECK(rep.global_fixed_dim == 1);
        CHECK(rep.offaxis_fixed_verified);
        // Projected distance follows sqrt(4*0.25^n + 16*0.0625^n).
        const double d2 = rep.projected_trace.at(2).dist;
        CHECK(d2 == Catch::Approx(std::sqrt(4.0 * std::pow(0.25, 2) +
                                            16.0 * std::pow(0.0625, 2)))
                        .margin(1e-12));
    }
    SECTION("non-commuting anchor is refused with the commutator norm") {
        const AnchoredReport rep = anchored_run(OperatorMap::rotation(kPi / 2.0),
                                                ProjectionOp::diagonal({1, 0}), {1.0, 0.0}, 1,
                                                0.5, 5);
        CHECK(rep.refused);
        CHECK(rep.reason.find("commut") != std::string::npos);
        REQUIRE(rep.commutator_norm.has_value());
        CHECK(*rep.commutator_norm == Catch::Approx(1.0).margin(1e-9));
    }
    SECTION("non-affine maps are refused by kind") {
        const AnchoredReport rep =
            anchored_run(OperatorMap::ball_projection({0.0, 0.0}, 1.0),
                         ProjectionOp::diagonal({1, 0}), {1.0, 0.0}, 1, 0.5, 5);
        CHECK(rep.refused);
        CHECK(rep.reason.find("affine") != std::string::npos);
    }
    SECTION("offset leaking out of the anchored subspace is refused") {
        const OperatorMap op = OperatorMap::affine(
            RealMatrix::from_rows({{1.0, 0.0}, {0.0, 0.5}}), Vec{1.0, 0.0});
        const AnchoredReport rep =
            anchored_run(op, ProjectionOp::diagonal({0, 1}), {1.0, 1.0}, 1, 0.5, 5);
        CHECK(rep.refused);
    }
    SECTION("rate mismatch is refused") {
        const OperatorMap op =
            OperatorMap::linear(RealMatrix::from_rows({{1.0, 0.0}, {0.0, 0.9}}));
        const AnchoredReport rep =
            anchored_run(op, ProjectionOp::diagonal({0, 1}), {1.0, 1.0}, 1, 0.5, 5);
        CHECK(rep.refused);
    }
}

TEST_CASE("tightness constructions meet their envelopes exactly") {
    SECTION("periodic") {
        auto sc = tightness_periodic(0.6, 3);
        REQUIRE(sc.ops.size() == 3);
        const OrbitTrace t =
            run_orbit(sc.source(), sc.x0, sc.z, 18, RunOptions{false, 1e-9, sc.schedule});
        const EnvelopeReport rep = envelope_check(t, sc.envelope);
        CHECK(rep.certified);
        CHECK(rep.equality_everywhere);
        for (long k = 1; k <= 6; ++k)
            CHECK(t.at(3 * k).dist == Catch::Approx(std::pow(0.6, k)).margin(1e-12));
    }
    SECTION("heterogeneous blocks") {
        auto sc = tightness_heterogeneous({{0.5, 2}, {0.9, 3}});
        CHECK(sc.horizon() == 5);
        const OrbitTrace t =
            run_orbit(sc.source(), sc.x0, sc.z, 5, RunOptions{false, 1e-9, sc.schedule});
        CHECK(t.at(2).dist == Catch::Approx(0.5).margin(1e-12));
        CHECK(t.at(5).dist == Catch::Approx(0.45).margin(1e-12));
        CHECK(envelope_check(t, sc.envelope).equality_everywhere);
    }
}

TEST_CASE("no-events run keeps its distance for ten thousand steps") {
    const OperatorMap rot = OperatorMap::rotation(kPi / 2.0);
    const auto source = [&](long) -> const OperatorMap & { return rot; };
    const OrbitTrace t = run_orbit(source, {1.0, 0.0}, {0.0, 0.0}, 10000);
    double drift = 0.0;
    for (const auto &s : t.steps)
        drift = std::max(drift, std::abs(s.dist - 1.0));
    CHECK(drift <= 1e-12);
    const EnvelopeReport rep = envelope_check(t, EnvelopeSpec::periodic_floor(0.9, 5, 5));
    CHECK_FALSE(rep.certified);
    REQUIRE(rep.first_violation.has_value());
    CHECK(*rep.first_violation == 5);
}

TEST_CASE("uniqueness witness separates fixed points from impostors") {
    auto sc = tightness_periodic(0.8, 4);
    const UniquenessReport same = uniqueness_witness(sc.ops, {0.0, 0.0}, {0.0, 0.0});
    CHECK(same.w_fixed);
    CHECK(same.z_fixed);
    CHECK(same.contraction_present);
    CHECK(same.period_certificate == Catch::Approx(0.8).margin(1e-12));
    CHECK(same.coincide);
    CHECK(same.consistent);

    const UniquenessReport drifter = uniqueness_witness(sc.ops, {1.0, 0.0}, {0.0, 0.0});
    CHECK_FALSE(drifter.w_fixed);
    CHECK(drifter.consistent); // no contradiction: w simply is not fixed
    CHECK(drifter.separation == Catch::Approx(1.0));
}

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "phlab/certifier.hpp"
#include "phlab/errors.hpp"
#include "phlab/twists.hpp"

using namespace phlab;

namespace {

Mat2i cat_map() {
    Mat2i a;
    a << 2, 1, 1, 1;
    return a;
}

SuspensionPtr pure(double eta = 0.0) { return make_suspension(cat_map(), ExpressionField::constant_field(1.0), eta); }

const double kLambda = (3 + std::sqrt(5.0)) / 2;

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::InvalidInput;
}

}  // namespace

TEST_CASE("cone fields") {
    const auto m = pure();
    CHECK_THROWS_AS(unstable_cone(m, 0.0), Error);
    CHECK_THROWS_AS(unstable_cone(m, 2.0), Error);
    const ConeField c = unstable_cone(m, 0.2);
    const ModelPoint p{0.1, 0.2, 0.3};
    CHECK(c.contains(p, c.axis(p)));
    for (const Vec3& v : c.boundary(p, 16)) CHECK(c.angle(p, v) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK_FALSE(c.contains(p, Vec3::UnitZ()));

    // The first boundary direction of an axis in the fiber tilts into the flow direction.
    const auto b = cone_boundary(Vec3(m->e_u()[0], m->e_u()[1], 0.0), 0.2, 4);
    CHECK(std::abs(b.front()[2]) == doctest::Approx(std::sin(0.2)).epsilon(1e-12));
}

TEST_CASE("splitting estimate recovers the exact suspension frame") {
    const auto m = pure();
    const ComposedMap f{std::make_shared<FlowTimePiece>(m, 1.0)};
    std::mt19937_64 rng(2);
    for (int i = 0; i < 5; ++i) {
        const ModelPoint p = m->sample(rng);
        const SplittingEstimate est = estimate_splitting_detailed(f, p);
        CHECK(est.frame.max_angle_to(*m->exact_splitting(p)) < 1e-10);
        CHECK(est.unstable_iterations <= 200);
    }
}

TEST_CASE("splitting estimate without dominance fails") {
    const auto m = pure();
    const ComposedMap id{std::make_shared<IdentityPiece>(m)};
    CHECK(code_of([&] { estimate_splitting(id, {0.1, 0.2, 0.3}, 64); }) == ErrorCode::NoConvergence);
}

TEST_CASE("finite-time exponents") {
    const auto m = pure();
    const ComposedMap f{std::make_shared<FlowTimePiece>(m, 1.0)};
    const auto e = ftle(f, {0.1, 0.2, 0.3}, 100);
    CHECK(e[0] == doctest::Approx(std::log(kLambda)).epsilon(1e-9));
    CHECK(std::abs(e[1]) < 1e-9);
    CHECK(e[2] == doctest::Approx(-std::log(kLambda)).epsilon(1e-9));
    CHECK(code_of([&] { ftle(f, {0.1, 0.2, 0.3}, 5); }) == ErrorCode::PreconditionViolation);

    // Flow time 6 on a roof of length 9 crosses the fiber 2/3 times per step.
    const auto m8 = pure(8.0);
    const ComposedMap g{std::make_shared<DehnTwistPiece>(m8, make_twist_path(1, 0)),
                        std::make_shared<FlowTimePiece>(m8, 6.0)};
    const auto eg = ftle(g, {0.3, 0.1, 2.0}, 300);
    CHECK(eg[0] == doctest::Approx(6.0 / 9.0 * std::log(kLambda)).epsilon(0.05));
}

TEST_CASE("h-transversality") {
    const auto m = pure();
    const DynamicsSpec f = DynamicsSpec::flow_time(m);
    const ComposedMap id{std::make_shared<IdentityPiece>(m)};
    TransverseOptions o;
    o.grid = 8;
    const auto c = check_h_transverse(f, f, id, o);
    CHECK(c.pass);
    CHECK(c.min_unstable_angle == doctest::Approx(std::numbers::pi / 2));
    CHECK(c.reversed_pass == c.pass);
    CHECK(c.reversed_min_unstable_angle == c.min_stable_angle);

    const auto m8 = pure(8.0);
    const DynamicsSpec f8 = DynamicsSpec::flow_time(m8);
    const ComposedMap h{std::make_shared<DehnTwistPiece>(m8, make_twist_path(1, 0))};
    CHECK(check_h_transverse(f8, f8, h, o).pass);

    // A fiber rotation carrying e_u onto e_s.
    const Vec2 eu = m->e_u(), es = m->e_s();
    Mat2 rot;
    rot.col(0) = es;
    rot.col(1) = -eu;
    Mat2 basis;
    basis.col(0) = eu;
    basis.col(1) = es;
    const Mat2 r = rot * basis.inverse();
    const ComposedMap bad{std::make_shared<FiberLinearPiece>(m, r)};
    const auto fail_cert = check_h_transverse(f, f, bad, o);
    CHECK_FALSE(fail_cert.pass);
    CHECK(fail_cert.min_unstable_angle < 1e-9);

    const DynamicsSpec inv = f.inverse();
    const ModelPoint p{0.1, 0.2, 0.3};
    CHECK(angle_between_lines(inv.splitting(p).unstable(), f.splitting(p).stable()) == 0.0);
    CHECK(inv.inverse().name() == f.name());
}

TEST_CASE("planner against the linear cocycle") {
    const auto m = pure();
    const DynamicsSpec f = DynamicsSpec::flow_time(m);
    const ComposedMap id{std::make_shared<IdentityPiece>(m)};
    TransverseOptions to;
    to.grid = 4;
    const Junction j{m, id, m, check_h_transverse(f, f, id, to)};
    PlanOptions po;
    po.alpha = 1e-3;
    po.grid = 4;
    const PlanResult r = plan_composition({j}, po);
    // Worst cone vector tilts into the flow direction, which is neutral: tan shrinks by lambda per step.
    const int closed = static_cast<int>(std::ceil(std::log(std::tan(0.2) / std::tan(1e-3)) / std::log(kLambda)));
    CHECK(std::abs(r.exponents.front() - closed) <= 1);
    const int m_star = r.exponents.front();
    CHECK(junction_unstable_angle(j, m_star, po) <= 1e-3);
    CHECK(junction_unstable_angle(j, m_star - 1, po) > 1e-3);

    po.alpha = 0.5;
    CHECK(plan_composition({j}, po).exponents.front() == 1);

    Junction unchecked = j;
    unchecked.certificate.reset();
    CHECK(code_of([&] { plan_composition({unchecked}, po); }) == ErrorCode::PreconditionViolation);
    Junction failing = j;
    failing.certificate->pass = false;
    CHECK(code_of([&] { plan_composition({failing}, po); }) == ErrorCode::PreconditionViolation);

    po.alpha = 1e-12;
    po.cap = 4;
    CHECK(code_of([&] { plan_composition({j}, po); }) == ErrorCode::CapExceeded);
}

TEST_CASE("certify the suspension time-1 map") {
    const auto m = pure();
    const ComposedMap f{std::make_shared<FlowTimePiece>(m, 1.0)};
    CertifyOptions o;
    o.grid = 8;
    const PHCertificate c = certify_ph(m, f, o);
    CHECK(c.pass);
    CHECK(c.splitting_exact);
    CHECK(c.lambda2 == doctest::Approx(kLambda).epsilon(1e-12));
    CHECK(c.lambda1 == doctest::Approx(1 / kLambda).epsilon(1e-12));
    CHECK(c.center_min == doctest::Approx(1.0));

    // Estimated splitting reaches the same rates.
    o.exact_splitting = false;
    o.grid = 4;
    const PHCertificate e = certify_ph(m, f, o);
    CHECK_FALSE(e.splitting_exact);
    CHECK(e.lambda2 == doctest::Approx(kLambda).epsilon(1e-9));
}

TEST_CASE("certify fails without hyperbolicity") {
    const auto m = pure();
    const ComposedMap id{std::make_shared<IdentityPiece>(m)};
    CertifyOptions o;
    o.grid = 4;
    const PHCertificate c = certify_ph(m, id, o);
    CHECK_FALSE(c.pass);
    CHECK_FALSE(c.gaps_evaluated);
    CHECK_FALSE(c.failures.empty());
}

TEST_CASE("under-iterated steep twist escapes the cones") {
    const auto m = pure(1.0);
    const auto h = std::make_shared<DehnTwistPiece>(m, make_twist_path(1, 0, TwistKind::Translation,
                                                                       RampProfile::centered(0.05)));
    const ComposedMap f{h, std::make_shared<FlowTimePiece>(m, 1.0)};
    CertifyOptions o;
    o.grid = 8;
    const PHCertificate c = certify_ph(m, f, o);
    CHECK_FALSE(c.pass);
    bool escape = false;
    for (const auto& w : c.witnesses) escape = escape || w.kind.starts_with("cone-escape");
    CHECK(escape);
}

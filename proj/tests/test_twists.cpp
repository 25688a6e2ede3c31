#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
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

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::InvalidInput;
}

// Angle between the golden-ratio eigenlines of [[2,1],[1,1]].
double eigen_angle() {
    const double phi = (std::sqrt(5.0) - 1) / 2;
    const Vec2 u(1.0, phi), s(1.0, -(std::sqrt(5.0) + 1) / 2);
    return std::acos(std::abs(u.dot(s)) / (u.norm() * s.norm()));
}

}  // namespace

TEST_CASE("ramp profiles") {
    const RampProfile r;
    CHECK(r.value(0.05) == 0.0);
    CHECK(r.value(0.95) == 1.0);
    CHECK(r.value(0.5) == doctest::Approx(0.5));
    CHECK(smoothstep7_d1(0.0) == 0.0);
    CHECK(smoothstep7_d2(1.0) == doctest::Approx(0.0));
    CHECK(smoothstep7_integral(1.0) == doctest::Approx(0.5));
    const RampProfile steep = RampProfile::centered(0.05);
    CHECK(steep.start() == doctest::Approx(0.475));
    CHECK(steep.max_derivative() == doctest::Approx(35.0 / 16.0 / 0.05));
    CHECK_THROWS_AS(RampProfile(0.6, 0.4), Error);
}

TEST_CASE("translation twist path") {
    const TwistPath t = make_twist_path(1, 0);
    const Vec2 v = t.apply(0.5, {0.2, 0.7});
    CHECK(v[0] == doctest::Approx(0.2 + t.profile().value(0.5)));
    CHECK(v[1] == doctest::Approx(0.7));
    CHECK(code_of([] { make_twist_path(0, 0); }) == ErrorCode::ZeroClass);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const Vec2 p(u(rng), u(rng));
        CHECK((t.apply(0.05, p) - p).norm() <= 1e-12);
        // phi_0.95 is the identity on the torus: a full integer translation.
        const Vec2 d = t.apply(0.95, p) - p;
        CHECK(std::abs(d[0] - std::round(d[0])) + std::abs(d[1] - std::round(d[1])) <= 1e-12);
    }
    CHECK(t.reversed().gamma_a() == -1);
    CHECK(t.velocity(0.5, {0.0, 0.0})[0] == doctest::Approx(t.profile().derivative(0.5)));
}

TEST_CASE("shear paths must be nilpotent") {
    Mat2 n;
    n << 0, 1, 0, 0;
    CHECK_NOTHROW(TwistPath::shear(n));
    n << 1, 0, 0, 0;
    CHECK(code_of([&] { TwistPath::shear(n); }) == ErrorCode::InvalidInput);
}

TEST_CASE("twist transversality on the cat map") {
    const auto m = pure();
    const double expected = eigen_angle();
    const MinAngleReport tr = check_twist_transversality(make_twist_path(1, 0), *m);
    CHECK(tr.pass);
    CHECK(tr.min_angle == doctest::Approx(expected).epsilon(1e-12));
    const MinAngleReport id = check_twist_transversality(TwistPath::identity(), *m);
    CHECK(id.pass);
    CHECK(id.min_angle == doctest::Approx(expected).epsilon(1e-12));

    // N = (e_s - e_u)(e_s + e_u)^T sends e_u to e_s - e_u, so D phi_1 (e_u) = e_s.
    const Vec2 eu = m->e_u(), es = m->e_s();
    const Mat2 n = (es - eu) * (es + eu).transpose();
    const MinAngleReport sh = check_twist_transversality(TwistPath::shear(n), *m);
    CHECK_FALSE(sh.pass);
    CHECK(sh.min_angle < 1e-6);
    CHECK(sh.argmin_s >= 0.9 - 1e-9);
}

TEST_CASE("group probe") {
    const auto m = pure();
    const GroupReport g = twist_group_probe(m->foliations(), {{1, 0}, {0, 1}, {1, 1}, {1, -1}});
    CHECK(g.passing.size() == 4);
    CHECK(g.irrational_slopes);
    CHECK(g.summary.find("full Z^2") != std::string::npos);

    const LinearFoliations same{m->e_s(), m->e_s()};
    CHECK(twist_group_probe(same, {{1, 0}}).invalid_foliations);
    CHECK(twist_group_probe(m->foliations(), {}).entries.empty());
}

TEST_CASE("glued Dehn twist") {
    const auto m = pure(2.0);
    const DehnTwistSpec spec = build_dehn_twist(m, make_twist_path(1, 0));
    CHECK(spec.transversality.pass);
    CHECK(spec.word.to_string() == "τ(1,0)");

    const ModelPoint outside{0.3, 0.4, 2.5};
    const Jet j = spec.piece->jet(outside);
    CHECK(m->distance(j.point, outside) == 0.0);
    CHECK(j.jacobian.isIdentity());

    const ModelPoint inside{0.3, 0.4, 1.0};
    const Jet k = spec.piece->jet(inside);
    CHECK(k.point[0] == doctest::Approx(0.8));
    CHECK(k.jacobian.determinant() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m->distance(spec.piece->inverse()->apply(k.point), inside) < 1e-14);

    CHECK(code_of([&] { build_dehn_twist(pure(0.0), make_twist_path(1, 0)); }) ==
          ErrorCode::PreconditionViolation);
    Mat2 n;
    n << 0, 1, 0, 0;
    CHECK(code_of([&] { DehnTwistPiece(m, TwistPath::shear(n)); }) == ErrorCode::UnsupportedTwist);
}

TEST_CASE("C1 distance to identity decays like 1/eta") {
    const TwistPath path = make_twist_path(1, 0);
    const double bound_numerator = path.profile().max_derivative() * path.gamma().norm();
    std::vector<double> dist;
    for (double eta : {2.0, 4.0, 8.0}) {
        const auto m = pure(eta);
        DehnTwistPiece h(m, path);
        double worst = 0.0;
        for (int i = 0; i <= 400; ++i) {
            const ModelPoint p{0.25, 0.5, eta * i / 400.0};
            worst = std::max(worst, (h.jet(p).jacobian - Mat3::Identity()).norm());
        }
        CHECK(worst <= bound_numerator / eta * (1 + 1e-12));
        dist.push_back(worst);
    }
    CHECK(dist[0] / dist[1] == doctest::Approx(2.0).epsilon(0.2));
    CHECK(dist[1] / dist[2] == doctest::Approx(2.0).epsilon(0.2));
}

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "phlab/errors.hpp"
#include "phlab/suspension.hpp"

using namespace phlab;

namespace {

Mat2i cat_map() {
    Mat2i a;
    a << 2, 1, 1, 1;
    return a;
}

SuspensionPtr pure(double eta = 0.0) { return make_suspension(cat_map(), ExpressionField::constant_field(1.0), eta); }

Mat3 fd_jacobian(const SuspensionModel& m, const ModelPoint& p, double t) {
    const double h = 1e-6;
    const ModelPoint base = m.flow(p, t).point;
    Mat3 j;
    for (int i = 0; i < 3; ++i) {
        Vec3 e = Vec3::Zero();
        e[i] = h;
        const ModelPoint plus = m.flow(m.displace(p, e), t).point;
        const ModelPoint minus = m.flow(m.displace(p, -e), t).point;
        j.col(i) = (m.displacement(base, plus) - m.displacement(base, minus)) / (2 * h);
    }
    return j;
}

}  // namespace

TEST_CASE("cat map eigen data") {
    const auto m = pure();
    CHECK(m->lambda_u() == doctest::Approx((3 + std::sqrt(5.0)) / 2).epsilon(1e-14));
    CHECK(std::abs(m->lambda_u() * m->lambda_s() - 1.0) < 1e-12);
    CHECK(m->e_u()[1] / m->e_u()[0] == doctest::Approx((std::sqrt(5.0) - 1) / 2).epsilon(1e-12));
}

TEST_CASE("construction errors") {
    Mat2i parabolic;
    parabolic << 1, 1, 0, 1;
    CHECK_THROWS_AS(make_suspension(parabolic, ExpressionField::constant_field(1.0), 0.0), Error);
    try {
        make_suspension(parabolic, ExpressionField::constant_field(1.0), 0.0);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotHyperbolic);
    }
    Mat2i det2;
    det2 << 2, 1, 0, 1;
    try {
        make_suspension(det2, ExpressionField::constant_field(1.0), 0.0);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotUnimodular);
    }
    try {
        make_suspension(cat_map(), ExpressionField::parse("1/(1+0.3*cos(2*pi*s))"), 0.0);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RhoOutOfRange);
    }
}

TEST_CASE("unit roof crossing applies A") {
    const auto m = pure();
    const Jet j = m->flow({0.3, 0.4, 0.0}, 1.0);
    CHECK(j.point[0] == doctest::Approx(0.0).epsilon(1e-12));  // 2*0.3+0.4 = 1.0 -> 0
    CHECK(j.point[1] == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(std::abs(j.point[2]) < 1e-12);
    Mat3 expected = block_fiber(m->a());
    CHECK((j.jacobian - expected).norm() < 1e-12);
    const Jet k = m->flow({0.1, 0.2, 0.3}, 3.5);
    CHECK((k.jacobian - block_fiber(m->a() * m->a() * m->a())).norm() < 1e-9);
}

TEST_CASE("uniform slowdown") {
    const auto slow = make_suspension(cat_map(), ExpressionField::constant_field(0.5), 0.0);
    const auto fast = pure();
    const ModelPoint p{0.2, 0.6, 0.0};
    const ModelPoint a = slow->flow(p, 2.0).point;
    const ModelPoint b = fast->flow(p, 1.0).point;
    CHECK(slow->distance(a, b) < 1e-12);
}

TEST_CASE("integrated differential matches finite differences") {
    const auto m = make_suspension(cat_map(), ExpressionField::parse("1/(1.3+0.3*cos(2*pi*s))"), 0.0);
    std::mt19937_64 rng(0);
    for (int i = 0; i < 10; ++i) {
        const ModelPoint p = m->sample(rng);
        const Mat3 j = m->flow(p, 1.0).jacobian;
        const Mat3 fd = fd_jacobian(*m, p, 1.0);
        CHECK((j - fd).norm() / j.norm() < 1e-5);
    }
}

TEST_CASE("x-dependent speed: differential, group property, volume") {
    const auto rho = ExpressionField::parse("1/(1+0.15*sin(pi*s)*sin(pi*s)*(1+sin(2*pi*x)))");
    const auto m = make_suspension(cat_map(), rho, 0.5);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 8; ++i) {
        const ModelPoint p = m->sample(rng);
        const Jet j = m->flow(p, 1.7);
        const Mat3 fd = fd_jacobian(*m, p, 1.7);
        CHECK((j.jacobian - fd).norm() / j.jacobian.norm() < 1e-5);
        const Jet back = m->flow(j.point, -1.7);
        CHECK(m->distance(back.point, p) < 1e-9);
        CHECK((back.jacobian * j.jacobian - Mat3::Identity()).norm() < 1e-7);
        const double ratio = m->speed(j.point.xyz()) / m->speed(m->reduce(p).xyz());
        CHECK(std::abs(j.jacobian.determinant() / ratio - 1.0) < 1e-6);
        const Jet a = m->flow(m->flow(p, 0.6).point, 1.1);
        CHECK(m->distance(a.point, j.point) < 1e-8);
    }
}

TEST_CASE("collar time change") {
    const auto change = eta_time_change(0.5, 0.2);
    CHECK(change->psi(-0.2) == doctest::Approx(-0.2).epsilon(1e-14));
    CHECK(change->psi(0.7) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(change->psi_d1(-0.2) == doctest::Approx(1.0));
    CHECK(change->psi_d1(0.7) == doctest::Approx(1.0));
    const auto base = make_suspension(cat_map(), change, 0.0);
    // Transit of the collar [-eps, eps] takes 2 eps + eta.
    const ModelPoint start{0.1, 0.2, 0.8};
    const ModelPoint end = base->flow(start, 0.4 + 0.5).point;
    CHECK(std::abs(end[2] - 0.2) < 1e-6);
}

TEST_CASE("collar time change tends to 1 linearly in eta") {
    // Mean speed over the collar is 2 eps / (2 eps + eta), so no admissible psi
    // gets max |rho_eta - 1| below eta / (2 eps + eta).
    const double eps = 0.2;
    for (double eta : {1e-1, 1e-2, 1e-3}) {
        const auto change = eta_time_change(eta, eps);
        double worst = 0.0;
        for (int i = 0; i <= 4000; ++i) {
            const double s = -0.3 + 0.6 * i / 4000.0;
            worst = std::max(worst, std::abs(change->value({0.3, 0.4, s - std::floor(s)}) - 1.0));
            CHECK(change->value({0.3, 0.4, s - std::floor(s)}) <= 1.0);
        }
        CHECK(worst >= eta / (2 * eps + eta));
        CHECK(worst <= 1.0 - change->min_value() + 1e-15);
        CHECK(worst <= 2 * eta / eps);
    }
}

TEST_CASE("collar conjugacy carries flows") {
    const double eta = 0.5;
    const auto change = eta_time_change(eta, 0.2);
    const auto base = make_suspension(cat_map(), change, 0.0);
    const auto boxed = pure(eta);
    const CollarConjugacy psi(boxed, base, change);
    std::mt19937_64 rng(7);
    for (int i = 0; i < 10; ++i) {
        const ModelPoint p = boxed->sample(rng);
        const ModelPoint q = psi.apply(p);
        const ModelPoint lhs = psi.apply(boxed->flow(p, 2.3).point);
        const ModelPoint rhs = base->flow(q, 2.3).point;
        CHECK(base->distance(lhs, rhs) < 1e-6);
        CHECK(boxed->distance(psi.inverse()->apply(q), p) < 1e-9);
    }
}

TEST_CASE("straightening chart") {
    const auto m = pure(2.0);
    const EtaChartPoint e = straighten(*m, {0.3, 0.4, 0.0});
    CHECK(e.t == 0.0);
    CHECK(straighten(*m, {0.3, 0.4, 1.0}).t == doctest::Approx(0.5));
    const ModelPoint p{0.3, 0.4, 0.2};
    const double t0 = straighten(*m, p).t;
    CHECK(straighten(*m, m->flow(p, 0.5).point).t - t0 == doctest::Approx(0.25).epsilon(1e-14));
    try {
        straighten(*m, {0.3, 0.4, 2.5});
        FAIL("expected throw");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::OutsideBox);
    }
    const PushedBundles b = pushed_bundles(*m, p, *m->exact_splitting(p));
    CHECK(b.stable_angle < 1e-12);
    CHECK(b.cs_plane_angle < 1e-9);
}

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "phlab/certifier.hpp"
#include "phlab/errors.hpp"
#include "phlab/geodesic.hpp"

using namespace phlab;

namespace {

std::shared_ptr<const GeodesicModel> model() {
    static const auto m = std::make_shared<GeodesicModel>();
    return m;
}

double dist_to_pm_identity(const Mat2& g) {
    return std::min((g - Mat2::Identity()).cwiseAbs().maxCoeff(), (g + Mat2::Identity()).cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("sl2 helpers") {
    const Vec3 v(0.3, -0.2, 0.5);
    const Mat2 g = sl2_exp(v);
    CHECK(g.determinant() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK((sl2_log(g) - v).norm() < 1e-13);
    CHECK((sl2_diagonal(1.0) - Mat2(Vec2(std::exp(0.5), std::exp(-0.5)).asDiagonal())).norm() < 1e-15);
    // A rotation by theta of the unit tangent is the elliptic element fixing i with angle theta/2.
    CHECK(dist_to_pm_identity(sl2_rotation(2 * std::numbers::pi)) < 1e-15);
    CHECK(cosh_distance_to_base(Mat2::Identity()) == doctest::Approx(1.0));
}

TEST_CASE("octagon group constants") {
    const auto g = octagon_group();
    CHECK(g->generators().size() == 8);
    CHECK(dist_to_pm_identity(g->relator_product()) < 1e-8);
    const double trace = 2 * (1 + std::sqrt(2.0));
    for (const Mat2& x : g->generators()) {
        CHECK(std::abs(x.trace()) == doctest::Approx(trace).epsilon(1e-12));
        CHECK(x.determinant() == doctest::Approx(1.0).epsilon(1e-13));
    }
    for (int k = 0; k < 4; ++k) {
        CHECK(dist_to_pm_identity(g->generators()[k] * g->generators()[k + 4]) < 1e-12);
    }
    CHECK(std::cosh(g->translation_length() / 2) == doctest::Approx(1 + std::sqrt(2.0)));
    CHECK(g->vertices().size() == 8);
    CHECK(g->vertex_angle_sum() == doctest::Approx(2 * std::numbers::pi).epsilon(1e-6));
    // Circumradius of the regular octagon with interior angle pi/4.
    CHECK(std::cosh(g->domain_radius()) == doctest::Approx(3 + 2 * std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("reduction into the fundamental domain") {
    const auto g = octagon_group();
    const Reduction id = g->reduce(Mat2::Identity());
    CHECK(id.word.empty());
    CHECK((id.element - Mat2::Identity()).norm() < 1e-15);

    const double bound = std::cosh(g->domain_radius()) * (1 + 1e-9);
    const Mat2 near = g->generators()[2] * sl2_exp({0.05, 0.02, -0.03});
    const Reduction r = g->reduce(near);
    CHECK(cosh_distance_to_base(r.element) <= bound);
    CHECK(dist_to_pm_identity(g->word_product(r.word) * near * r.element.inverse()) < 1e-10);

    // word * p reduces back to ±p. Roundoff grows like cosh d(x i, i) * eps, so
    // only words whose products are representable in doubles are compared.
    const Mat2 p = sl2_exp({0.01, -0.02, 0.015});
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> pick(0, 7);
    std::size_t worst = 0;
    int compared = 0;
    for (int len : {10, 30}) {
        for (int trial = 0; trial < 50; ++trial) {
            Mat2 x = p;
            for (int i = 0; i < len; ++i) x = g->generators()[pick(rng)] * x;
            const Reduction rr = g->reduce(x);
            worst = std::max(worst, rr.word.size());
            const double cd = cosh_distance_to_base(x);
            if (cd > 1e12) continue;
            ++compared;
            CHECK(std::min((rr.element - p).norm(), (rr.element + p).norm()) <= 1e-12 * cd);
            CHECK(cosh_distance_to_base(rr.element) <= bound);
        }
    }
    CHECK(compared >= 50);
    CHECK(worst <= 100);
}

TEST_CASE("geodesic flow") {
    const auto m = model();
    std::mt19937_64 rng(8);
    for (int i = 0; i < 50; ++i) {
        const ModelPoint p = m->sample(rng);
        const ModelPoint a = m->flow(m->flow(p, 0.7).point, 1.6).point;
        const ModelPoint b = m->flow(p, 2.3).point;
        CHECK(m->distance(a, b) < 1e-8);
    }
    const Jet j = m->flow(m->sample(rng), 1.0);
    const Mat3 expect = Vec3(std::exp(1.0), 1.0, std::exp(-1.0)).asDiagonal();
    CHECK((j.jacobian - expect).norm() < 1e-14);
    CHECK_THROWS_AS(m->flow(j.point, 2000.0), Error);

    // The axis of a generator closes up after one translation length.
    const double len = m->group().translation_length();
    for (int k = 0; k < 4; ++k) {
        const ModelPoint s = m->axis_state(k);
        CHECK(m->distance(m->flow(s, len).point, s) < 1e-6);
        CHECK(m->distance(m->flow(s, 0.5 * len).point, s) > 0.1);
    }
}

TEST_CASE("displacement inverts displace") {
    const auto m = model();
    std::mt19937_64 rng(9);
    for (int i = 0; i < 20; ++i) {
        const ModelPoint p = m->sample(rng);
        const Vec3 v(0.01, -0.02, 0.005);
        CHECK((m->displacement(p, m->displace(p, v)) - v).norm() < 1e-12);
    }
}

TEST_CASE("exact splitting is invariant with rates e and 1/e") {
    const auto m = model();
    const ModelPoint p = m->sample(*std::make_unique<std::mt19937_64>(1));
    const SplittingFrame s = geodesic_splitting(p);
    const Jet j = m->flow(p, 1.0);
    CHECK(angle_between_lines(j.jacobian * s.unstable(), s.unstable()) < 1e-12);
    CHECK(angle_between_lines(j.jacobian * s.stable(), s.stable()) < 1e-12);
    CHECK((j.jacobian * s.unstable()).norm() == doctest::Approx(std::numbers::e));

    const ComposedMap f{std::make_shared<FlowTimePiece>(m, 1.0)};
    CertifyOptions o;
    o.grid = 6;
    const PHCertificate c = certify_ph(m, f, o);
    CHECK(c.pass);
    CHECK(c.lambda2 == doctest::Approx(std::numbers::e).epsilon(1e-12));
    CHECK(c.lambda1 == doctest::Approx(1 / std::numbers::e).epsilon(1e-12));

    const auto e = ftle(f, p, 200);
    CHECK(e[0] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(std::abs(e[1]) < 1e-3);
    CHECK(e[2] == doctest::Approx(-1.0).epsilon(1e-3));
}

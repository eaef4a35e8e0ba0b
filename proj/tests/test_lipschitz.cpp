#include <catch2/catch_amalgamated.hpp>

#include "liplab/lipschitz.hpp"

using namespace liplab;

namespace {

Vec rvec(Rng& rng, int dim, double lo = -1.0, double hi = 1.0) {
    Vec v(static_cast<std::size_t>(dim));
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

NormedSpace random_space(Rng& rng, int dim) {
    switch (rng.uniform_index(4)) {
        case 0: return NormedSpace::lp(dim, 1.0);
        case 1: return NormedSpace::lp(dim, 2.0);
        case 2: return NormedSpace::lp(dim, kInfExponent);
        default: {
            Vec w(static_cast<std::size_t>(dim));
            for (auto& x : w) x = rng.uniform(0.5, 2.0);
            return NormedSpace::weighted_lp(w, 2.0);
        }
    }
}

}  // namespace

TEST_CASE("lip_on_set brute force") {
    auto line = NormedSpace::lp(1, 2.0);
    CHECK(lip_on_set(line, {{0.0}, {1.0}, {2.0}}, {0.0, 2.0, 4.0}) == 2.0);
    CHECK(lip_on_set(line, {{0.0}, {0.7}, {2.0}}, {3.0, 3.0, 3.0}) == 0.0);
    CHECK(lip_on_set(line, {{5.0}}, {1.0}) == 0.0);

    // x+y under the sup norm: the diagonal pair realizes the constant 2
    auto plane = NormedSpace::lp(2, kInfExponent);
    CHECK(lip_on_set(plane, {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}}, {0.0, 1.0, 2.0}) == 2.0);

    CHECK_THROWS_AS(lip_on_set(line, {{1.0}, {1.0}}, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("finite samples validate and round-trip through CSV") {
    auto plane = NormedSpace::lp(2, 2.0);
    FiniteSampleFunction f(plane, {{0.0, 0.0}, {1.0, 0.5}, {-0.25, 2.0}}, {1.0, -0.5, 3.0});
    CHECK(f.min_pairwise_distance > 0.0);
    CHECK_THROWS_AS(FiniteSampleFunction(plane, {{0.0, 0.0}, {0.0, 0.0}}, {0.0, 1.0}), std::invalid_argument);

    const auto g = FiniteSampleFunction::from_csv(plane, f.to_csv());
    REQUIRE(g.size() == f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(g.values[i] == f.values[i]);
        CHECK(g.points[i] == f.points[i]);
    }
}

TEST_CASE("asymptotic slope of affine fields equals the dual norm of the slope") {
    Rng rng(21);
    for (int t = 0; t < 12; ++t) {
        const int dim = 1 + static_cast<int>(rng.uniform_index(3));
        auto space = random_space(rng, dim);
        const Vec omega = rvec(rng, dim, -2.0, 2.0);
        auto f = fields::affine(space, omega, rng.uniform(-1.0, 1.0)).as_field();
        const Vec x = rvec(rng, dim);
        const auto st = asymptotic_slope(f, x, {1.0, 0.25, 0.05}, 24, 99);
        for (const auto& [r, est] : st.trace) CHECK(est == Catch::Approx(space.dual_norm(omega)).margin(1e-9));
    }
}

TEST_CASE("asymptotic slope at a symmetric kink and along a parabola") {
    auto line = NormedSpace::lp(1, 2.0);
    ScalarField absf;
    absf.space = line;
    absf.eval = [](const Vec& x) { return std::abs(x[0]); };
    absf.lip_bound = 1.0;
    const auto at0 = asymptotic_slope(absf, {0.0}, {1.0, 0.1, 0.01}, 32, 5);
    CHECK(at0.slope == Catch::Approx(1.0).margin(1e-9));

    ScalarField sq;
    sq.space = line;
    sq.eval = [](const Vec& x) { return x[0] * x[0]; };
    sq.gradient = [](const Vec& x) { return Vec{2.0 * x[0]}; };
    const auto at3 = asymptotic_slope(sq, {3.0}, {1.0, 0.1, 0.01}, 32, 5);
    for (const auto& [r, est] : at3.trace) CHECK(std::abs(est - 6.0) <= 2.0 * r + 1e-12);
    CHECK(at3.slope == Catch::Approx(6.0).margin(0.03));

    CHECK_THROWS_AS(asymptotic_slope(sq, {3.0}, {}, 8, 5), std::invalid_argument);
    CHECK_THROWS_AS(asymptotic_slope(sq, {3.0}, {0.1, 1.0}, 8, 5), std::invalid_argument);
}

TEST_CASE("asymptotic slope within a finite sample vanishes at base points") {
    auto line = NormedSpace::lp(1, 2.0);
    FiniteSampleFunction f(line, {{0.0}, {1.0}, {2.0}}, {0.0, 5.0, 1.0});
    const auto st = asymptotic_slope(f, {1.0}, {3.0, 1.5, 0.5});
    CHECK(st.trace[0].second == 5.0);   // all three points in the ball
    CHECK(st.trace.back().second == 0.0);  // isolated point
}

TEST_CASE("asymptotic slope stays below a declared Lipschitz bound") {
    Rng rng(77);
    auto plane = NormedSpace::lp(2, 2.0);
    auto cone = fields::norm_cone(NormedSpace::lp(2, kInfExponent));
    auto f = cone.as_field();
    REQUIRE(f.lip_bound);
    for (int t = 0; t < 20; ++t) {
        const Vec x = rvec(rng, 2, -1.5, 1.5);
        const auto st = asymptotic_slope(f, x, {0.5, 0.1}, 24, 1234 + static_cast<std::uint64_t>(t));
        for (const auto& [r, est] : st.trace) CHECK(est <= *f.lip_bound + 1e-9);
    }
    (void)plane;
}

TEST_CASE("McShane extension") {
    auto line = NormedSpace::lp(1, 2.0);

    SECTION("single point gives a constant") {
        FiniteSampleFunction base(line, {{2.0}}, {7.5});
        auto f = mcshane_extend(base, 0.0);
        CHECK(f.eval({-3.0}) == 7.5);
        CHECK(f.eval({11.0}) == 7.5);
    }

    SECTION("two-term envelope by hand") {
        FiniteSampleFunction base(line, {{0.0}, {1.0}}, {0.0, 1.0});
        auto f = mcshane_extend(base, 1.0);
        CHECK(f.eval({0.5}) == Catch::Approx(0.5).margin(1e-15));
        CHECK(f.eval({-1.0}) == Catch::Approx(1.0).margin(1e-15));  // min(|y|, 1+|y-1|) at -1
        CHECK(f.eval({2.0}) == Catch::Approx(2.0).margin(1e-15));
    }

    SECTION("rejects a constant below the base Lipschitz constant") {
        FiniteSampleFunction base(line, {{0.0}, {1.0}}, {0.0, 2.0});
        CHECK_THROWS_AS(mcshane_extend(base, 1.0), std::invalid_argument);
    }

    SECTION("restriction to base points is exact; output is L-Lipschitz on samples") {
        Rng rng(4);
        for (int inst = 0; inst < 100; ++inst) {
            const int dim = 1 + static_cast<int>(rng.uniform_index(3));
            auto space = random_space(rng, dim);
            const std::size_t npts = 2 + rng.uniform_index(6);
            Mat pts;
            Vec vals;
            while (pts.size() < npts) {
                Vec p = rvec(rng, dim);
                bool dup = false;
                for (const auto& q : pts) dup = dup || space.norm(vec_sub(p, q)) < 1e-6;
                if (!dup) {
                    pts.push_back(p);
                    vals.push_back(rng.uniform(-2.0, 2.0));
                }
            }
            FiniteSampleFunction base(space, pts, vals);
            const double lip = lip_on_set(base) * rng.uniform(1.0, 1.5);
            auto f = mcshane_extend(base, lip);
            for (std::size_t i = 0; i < base.size(); ++i)
                CHECK(f.eval(base.points[i]) == base.values[i]);
            for (int t = 0; t < 40; ++t) {
                const Vec u = rvec(rng, dim, -2.0, 2.0);
                const Vec v = rvec(rng, dim, -2.0, 2.0);
                const double d = space.norm(vec_sub(u, v));
                if (d > 1e-9) CHECK(std::abs(f.eval(u) - f.eval(v)) <= lip * d + 1e-9);
            }
        }
    }
}

TEST_CASE("plateau extension matches the hand example on the line") {
    auto line = NormedSpace::lp(1, 2.0);
    FiniteSampleFunction base(line, {{0.0}, {1.0}}, {0.0, 1.0});
    auto ext = plateau_extend(base, 1.0);
    CHECK(ext.lip_base == 1.0);
    CHECK(ext.lip_ext == 2.0);
    CHECK(ext.plateau_radius == Catch::Approx(0.25));

    CHECK(ext.eval({0.0}) == 0.0);
    CHECK(ext.eval({1.0}) == 1.0);
    CHECK(ext.eval({0.2}) == 0.0);    // inside the plateau
    CHECK(ext.eval({-0.25}) == 0.0);  // plateau boundary
    CHECK(ext.eval({0.5}) == Catch::Approx(0.5).margin(1e-15));
    CHECK(ext.eval({0.4}) == Catch::Approx(2.0 * (0.4 - 0.25)).margin(1e-15));
    CHECK(ext.eval({0.9}) == 1.0);
    // far from every base point the lower envelope rises and clamps at M
    CHECK(ext.eval({5.0}) == 1.0);
    CHECK(ext.eval({-4.0}) == 1.0);

    SECTION("single point degenerates to a constant") {
        FiniteSampleFunction one(line, {{0.3}}, {2.0});
        auto c = plateau_extend(one, 0.5);
        CHECK(c.eval({100.0}) == 2.0);
    }
    CHECK_THROWS_AS(plateau_extend(base, 0.0), std::invalid_argument);
}

TEST_CASE("plateau extension contract on random bases") {
    Rng rng(31);
    for (int inst = 0; inst < 40; ++inst) {
        const int dim = 1 + static_cast<int>(rng.uniform_index(3));
        auto space = random_space(rng, dim);
        const std::size_t npts = 2 + rng.uniform_index(7);
        Mat pts;
        Vec vals;
        while (pts.size() < npts) {
            Vec p = rvec(rng, dim);
            bool dup = false;
            for (const auto& q : pts) dup = dup || space.norm(vec_sub(p, q)) < 5e-2;
            if (!dup) {
                pts.push_back(p);
                vals.push_back(rng.uniform(-2.0, 2.0));
            }
        }
        FiniteSampleFunction base(space, pts, vals);
        const double eps = rng.uniform(0.1, 1.0);
        auto ext = plateau_extend(base, eps);

        // exact extension
        for (std::size_t i = 0; i < base.size(); ++i)
            CHECK(std::abs(ext.eval(base.points[i]) - base.values[i]) <= 1e-12);

        // sampled Lipschitz bound
        for (int t = 0; t < 600; ++t) {
            const Vec u = rvec(rng, dim, -2.0, 2.0);
            const Vec v = rvec(rng, dim, -2.0, 2.0);
            const double d = space.norm(vec_sub(u, v));
            if (d > 1e-9) CHECK(std::abs(ext.eval(u) - ext.eval(v)) <= ext.lip_ext * d + 1e-9);
        }

        // constant on half-radius balls, inside the value range everywhere
        for (std::size_t i = 0; i < base.size(); ++i) {
            for (int t = 0; t < 20; ++t) {
                const Vec y = sample_ball(space, base.points[i], ext.plateau_radius / 2.0, rng);
                CHECK(std::abs(ext.eval(y) - base.values[i]) <= 1e-12);
            }
        }
        for (int t = 0; t < 100; ++t) {
            const double val = ext.eval(rvec(rng, dim, -3.0, 3.0));
            CHECK(val >= ext.bounds.first);
            CHECK(val <= ext.bounds.second);
        }

        // the lower envelope dominates the matching upper envelope, and both
        // coincide with the base values at base points
        for (int t = 0; t < 200; ++t) {
            const Vec y = rvec(rng, dim, -2.5, 2.5);
            CHECK(ext.lower_envelope(y) >= ext.upper_envelope(y) - 1e-12);
        }
        for (std::size_t i = 0; i < base.size(); ++i) {
            CHECK(ext.lower_envelope(base.points[i]) == Catch::Approx(base.values[i]).margin(1e-12));
            CHECK(ext.upper_envelope(base.points[i]) == Catch::Approx(base.values[i]).margin(1e-12));
        }
    }
}

TEST_CASE("scalar field invariants: declared gradients and bounds") {
    Rng rng(55);
    auto space = NormedSpace::lp(2, 2.0);
    ScalarField smooth;
    smooth.space = space;
    smooth.eval = [](const Vec& x) { return std::sin(x[0]) + 0.5 * x[1] * x[1]; };
    smooth.gradient = [](const Vec& x) { return Vec{std::cos(x[0]), x[1]}; };
    for (int t = 0; t < 100; ++t) {
        const Vec x = rvec(rng, 2);
        const Vec g = smooth.gradient(x);
        const double h = 1e-6;
        for (int i = 0; i < 2; ++i) {
            Vec xp = x, xm = x;
            xp[static_cast<std::size_t>(i)] += h;
            xm[static_cast<std::size_t>(i)] -= h;
            const double fd = (smooth.eval(xp) - smooth.eval(xm)) / (2.0 * h);
            CHECK(fd == Catch::Approx(g[static_cast<std::size_t>(i)]).epsilon(1e-4).margin(1e-7));
        }
    }

    auto cone = fields::norm_cone(NormedSpace::lp(2, kInfExponent));
    auto f = cone.as_field();
    REQUIRE(f.lip_bound);
    CHECK(*f.lip_bound == 2.0);  // dual of sup is l1, and the slopes are (+-1, +-1)
    for (int t = 0; t < 500; ++t) {
        const Vec u = rvec(rng, 2, -2.0, 2.0);
        const Vec v = rvec(rng, 2, -2.0, 2.0);
        const double d = f.space.norm(vec_sub(u, v));
        if (d > 1e-9) CHECK(std::abs(f.eval(u) - f.eval(v)) <= *f.lip_bound * d + 1e-9);
    }
}

TEST_CASE("polyhedral families evaluate as expected") {
    auto line = NormedSpace::lp(1, 2.0);
    auto k = fields::kink(line, 0.5);
    CHECK(k.eval({0.5}) == 0.0);
    CHECK(k.eval({0.0}) == 0.5);
    CHECK(k.eval({2.0}) == 1.5);
    CHECK(k.gradient({0.8}) == Vec{1.0});
    CHECK(k.gradient({0.2}) == Vec{-1.0});
    CHECK(k.lip_bound() == 1.0);

    auto r = fields::ramp(line, 0.5, 0.25);
    CHECK(r.eval({0.0}) == 0.0);
    CHECK(r.eval({0.5}) == Catch::Approx(0.5));
    CHECK(r.eval({0.4375}) == Catch::Approx(0.25));
    CHECK(r.eval({1.0}) == 1.0);
    CHECK(r.lip_bound() == Catch::Approx(4.0));

    auto cone = fields::norm_cone(NormedSpace::lp(2, kInfExponent));
    CHECK(cone.eval({0.3, -0.2}) == Catch::Approx(0.5));
    CHECK(cone.eval({2.0, 2.0}) == 1.0);
    CHECK(cone.eval({0.0, 0.0}) == 0.0);
    CHECK(cone.gradient({0.3, 0.2}) == Vec{1.0, 1.0});
    CHECK(cone.gradient({2.0, 2.0}) == Vec{0.0, 0.0});  // clamp active
}

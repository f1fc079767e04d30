#include "flatcone/divisor.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace flatcone;

namespace {

Divisor make_divisor(std::initializer_list<std::pair<Complex, ExactReal>> finite,
                     std::optional<ExactReal> at_inf = std::nullopt) {
    std::vector<ConePoint> pts;
    for (const auto& [z, a] : finite) pts.emplace_back(SpherePoint::at(z), a);
    if (at_inf) pts.emplace_back(SpherePoint::at_infinity(), *at_inf);
    return Divisor(std::move(pts));
}

ExactReal frac(std::int64_t p, std::int64_t q) { return ExactReal::from_fraction(p, q); }

} // namespace

TEST_CASE("degree sums the exponents alpha_j - 1") {
    CHECK(degree(Divisor()).value() == 0.0);

    const Divisor thirds = make_divisor(
        {{Complex(0, 0), frac(1, 3)}, {Complex(1, 0), frac(1, 3)}, {Complex(2, 0), frac(1, 3)}});
    CHECK(degree(thirds).is_exact());
    CHECK(degree(thirds) == frac(-2, 1));

    const Divisor single = make_divisor({{Complex(0, 0), frac(-1, 1)}});
    CHECK(degree(single).value() == -2.0);

    // infinity contributes like any other point
    const Divisor with_inf = make_divisor({{Complex(0, 0), frac(1, 2)}}, frac(1, 2));
    CHECK(degree(with_inf) == frac(-1, 1));
}

TEST_CASE("gauss-bonnet validation is exact for fraction input") {
    const auto pass = validate_gauss_bonnet(make_divisor(
        {{Complex(0, 0), frac(1, 3)}, {Complex(1, 0), frac(1, 3)}, {Complex(2, 0), frac(1, 3)}}));
    CHECK(pass.pass);
    CHECK(pass.exact);
    CHECK(pass.degree == -2.0);
    CHECK(pass.deficit == 0.0);

    const auto fail = validate_gauss_bonnet(make_divisor(
        {{Complex(0, 0), frac(1, 2)}, {Complex(1, 0), frac(1, 2)}, {Complex(2, 0), frac(1, 1)}}));
    CHECK_FALSE(fail.pass);
    CHECK(fail.deficit == 1.0);

    CHECK(validate_gauss_bonnet(make_divisor({{Complex(0, 0), frac(-1, 1)}})).pass);

    // a decimal that is not exactly representable still passes within 1e-12
    const Divisor decimal = make_divisor({{Complex(0, 0), ExactReal::from_double(1.0 / 3.0)},
                                          {Complex(1, 0), ExactReal::from_double(1.0 / 3.0)},
                                          {Complex(2, 0), ExactReal::from_double(1.0 / 3.0)}});
    const auto report = validate_gauss_bonnet(decimal);
    CHECK(report.pass);
    CHECK_FALSE(report.exact);
}

TEST_CASE("completion at infinity repairs the degree exactly") {
    SECTION("two thirds") {
        const Divisor d = make_divisor({{Complex(0, 0), frac(1, 3)}, {Complex(1, 0), frac(1, 3)}});
        const Divisor completed = complete_at_infinity(d);
        REQUIRE(completed.has_infinity());
        CHECK(completed.infinity_point()->alpha == frac(1, 3));
        CHECK(validate_gauss_bonnet(completed).pass);
        CHECK(validate_gauss_bonnet(completed).exact);
    }
    SECTION("cusp at infinity") {
        const Divisor d = make_divisor({{Complex(0, 0), frac(1, 2)}, {Complex(1, 0), frac(1, 2)}});
        const Divisor completed = complete_at_infinity(d);
        REQUIRE(completed.has_infinity());
        CHECK(completed.infinity_point()->alpha == frac(0, 1));
    }
    SECTION("smooth infinity is omitted") {
        const Divisor d = make_divisor(
            {{Complex(0, 0), frac(2, 1)}, {Complex(1, 0), frac(2, 1)}, {Complex(2, 0), frac(-3, 1)}});
        const Divisor completed = complete_at_infinity(d);
        CHECK_FALSE(completed.has_infinity());
        CHECK(completed.size() == 3);
        CHECK(validate_gauss_bonnet(completed).pass);
    }
    SECTION("already-complete input is rejected") {
        const Divisor d = make_divisor({{Complex(0, 0), frac(1, 2)}}, frac(1, 2));
        CHECK_THROWS_AS(complete_at_infinity(d), validation_error);
    }
}

TEST_CASE("combine adds exponents and removes trivial points") {
    const Complex p(0, 0), q(1, 0);

    SECTION("identity") {
        const Divisor d = make_divisor({{p, frac(1, 3)}});
        const Divisor c = combine(d, Divisor());
        REQUIRE(c.size() == 1);
        CHECK(c.points()[0].alpha == frac(1, 3));
    }
    SECTION("inverse cancels") {
        // exponents 1/2 and -1/2, i.e. alphas 3/2 and 1/2
        const Divisor a = make_divisor({{p, frac(3, 2)}});
        const Divisor b = make_divisor({{p, frac(1, 2)}});
        CHECK(combine(a, b).empty());
    }
    SECTION("disjoint union") {
        const Divisor a = make_divisor({{p, frac(3, 2)}});   // exponent 1/2
        const Divisor b = make_divisor({{q, frac(4, 3)}});   // exponent 1/3
        const Divisor c = combine(a, b);
        REQUIRE(c.size() == 2);
        CHECK(degree(c) == frac(5, 6));
    }
}

TEST_CASE("divisor algebra properties over random rational divisors") {
    std::mt19937 rng(20240811);
    std::uniform_int_distribution<std::int64_t> num(-6, 6);
    std::uniform_int_distribution<std::int64_t> den(1, 8);
    std::uniform_int_distribution<int> count(0, 4);
    std::uniform_int_distribution<int> coord(-5, 5);

    auto random_divisor = [&]() {
        std::vector<ConePoint> pts;
        const int n = count(rng);
        for (int i = 0; i < n; ++i) {
            Complex z;
            bool fresh = false;
            while (!fresh) {
                z = Complex(coord(rng), coord(rng));
                fresh = true;
                for (const auto& p : pts)
                    if (!p.position.is_infinity() && p.position.value() == z) fresh = false;
            }
            pts.emplace_back(SpherePoint::at(z), frac(num(rng), den(rng)));
        }
        return Divisor(std::move(pts));
    };

    for (int trial = 0; trial < 200; ++trial) {
        const Divisor a = random_divisor();
        const Divisor b = random_divisor();

        // degree is additive
        const ExactReal lhs = degree(combine(a, b));
        const ExactReal rhs = degree(a) + degree(b);
        CHECK(lhs == rhs);

        // commutativity as position -> exponent maps
        const Divisor ab = combine(a, b);
        const Divisor ba = combine(b, a);
        REQUIRE(ab.size() == ba.size());
        for (const auto& p : ab.points()) {
            bool found = false;
            for (const auto& r : ba.points())
                if (r.position == p.position && r.alpha == p.alpha) found = true;
            CHECK(found);
        }

        // completion always lands exactly on the sphere's Euler characteristic
        if (!a.has_infinity()) {
            const auto report = validate_gauss_bonnet(complete_at_infinity(a));
            CHECK(report.pass);
            CHECK(report.exact);
        }
    }
}

TEST_CASE("divisor construction rejects bad input") {
    CHECK_THROWS_AS(make_divisor({{Complex(0, 0), frac(1, 2)}, {Complex(0, 0), frac(1, 3)}}),
                    validation_error);
    CHECK_THROWS_AS(
        Divisor({ConePoint(SpherePoint::at_infinity(), frac(1, 2)),
                 ConePoint(SpherePoint::at_infinity(), frac(1, 3))}),
        validation_error);
    CHECK_THROWS_AS(ConePoint(SpherePoint::at(Complex(0, 0)),
                              ExactReal::from_double(std::numeric_limits<double>::infinity())),
                    validation_error);
    CHECK_THROWS_AS(ExactReal::from_fraction(1, 0), validation_error);
}

TEST_CASE("conditioning warning threshold") {
    CHECK_FALSE(make_divisor({{Complex(0, 0), frac(49, 1)}}).ill_conditioned());
    CHECK(make_divisor({{Complex(0, 0), frac(51, 1)}}).ill_conditioned());
    CHECK(make_divisor({{Complex(0, 0), frac(-51, 1)}}).ill_conditioned());
}

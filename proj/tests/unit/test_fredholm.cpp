#include <doctest.h>

#include "helpers.hpp"
#include "nibm/errors.hpp"
#include "nibm/fredholm.hpp"

using namespace nibm;
using namespace nibm::fredholm;
using namespace testing_support;

TEST_CASE("single slice limits") {
    CHECK(close(fredholm_det({{{0.0, 12.0}}}), 1.0, 1e-9));
    double low = fredholm_det({{{0.0, -6.0}}, 48, 18.0});
    CHECK(low < 0.01);
    CHECK(close(low, fredholm_det({{{0.0, -6.0}}, 96, 18.0}), 1e-6));
}

TEST_CASE("joint gap probability is below each marginal") {
    double a = -1.0;
    double m0 = fredholm_det({{{0.0, a}}});
    double m1 = fredholm_det({{{0.5, a}}});
    double joint = fredholm_det({{{0.0, a}, {0.5, a}}});
    CHECK(joint <= m0 + 1e-9);
    CHECK(joint <= m1 + 1e-9);
    CHECK(joint >= 0.0);
}

TEST_CASE("far-apart slices decorrelate") {
    double a = -1.0, b = -0.5;
    double joint = fredholm_det({{{0.0, a}, {6.0, b}}});
    double prod = fredholm_det({{{0.0, a}}}) * fredholm_det({{{6.0, b}}});
    CHECK(close(joint, prod, 1e-3));
}

TEST_CASE("Tracy-Widom CDF") {
    CHECK(close(tracy_widom_cdf(8.0), 1.0, 1e-8));
    CHECK(tracy_widom_cdf(-8.0) < 1e-4);
    double a = tracy_widom_cdf(-2), b = tracy_widom_cdf(0), c = tracy_widom_cdf(2);
    CHECK(a < b);
    CHECK(b < c);
    // reference values of F2 to the printed digits
    CHECK(close(a, 0.413224142505, 1e-9));
    CHECK(close(b, 0.969372828355, 1e-9));
    for (double s : {-4.0, -2.0, 0.0, 2.0}) CHECK(close(tracy_widom_cdf(s, 32), tracy_widom_cdf(s, 64), 1e-6));
    double prev = -1;
    for (int i = 0; i < 50; ++i) {
        double s = -6 + 10.0 * i / 49, f = tracy_widom_cdf(s);
        CHECK(f >= prev);
        CHECK(f >= -1e-9);
        CHECK(f <= 1 + 1e-9);
        prev = f;
    }
}

TEST_CASE("validation") {
    CHECK_THROWS_AS(fredholm_det({{}}), DomainError);
    CHECK_THROWS_AS(fredholm_det({{{1.0, 0.0}, {0.5, 0.0}}}), DomainError);
    CHECK_THROWS_AS(fredholm_det({{{0.0, 0.0}}, 7}), DomainError);
    CHECK_THROWS_AS(fredholm_det({{{0.0, -4.0}}, 48, 2.0}), DomainError);
    CHECK_THROWS_AS(tracy_widom_cdf(11.0), DomainError);
}

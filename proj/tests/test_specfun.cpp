#include "fracmem/specfun.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace fracmem;

TEST_CASE("gamma: exact and frozen values") {
    CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gamma_fn(0.5) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-14));
    // Independent oracle: shift + Stirling tail.
    CHECK(oracles::rel_err(gamma_fn(4.7), 15.43141160004743171196) < 1e-14);
    CHECK(gamma_fn(6.0) == doctest::Approx(120.0).epsilon(1e-14));
}

TEST_CASE("gamma: 1e-13 relative accuracy against the Stirling oracle on (0, 170]") {
    for (double x = 0.03125; x <= 170.0; x += 0.203125) {
        double want = static_cast<double>(oracles::gamma_stirling(static_cast<long double>(x)));
        CHECK(oracles::rel_err(gamma_fn(x), want) < 1e-13);
    }
}

TEST_CASE("gamma: domain and overflow errors") {
    CHECK_THROWS_AS(gamma_fn(0.0), DomainError);
    CHECK_THROWS_AS(gamma_fn(-2.5), DomainError);
    CHECK_THROWS_AS(gamma_fn(172.0), OverflowError);
}

TEST_CASE("log_gamma agrees with gamma and extends past overflow") {
    for (double x : {0.2, 1.0, 4.7, 35.0, 150.0})
        CHECK(log_gamma(x) == doctest::Approx(std::log(gamma_fn(x))).epsilon(1e-12));
    double big = static_cast<double>(std::lgamma(400.0L));
    CHECK(log_gamma(400.0) == doctest::Approx(big).epsilon(1e-13));
}

TEST_CASE("reciprocal_gamma vanishes at the poles and matches 1/gamma elsewhere") {
    CHECK(reciprocal_gamma(0.0) == 0.0);
    CHECK(reciprocal_gamma(-1.0) == 0.0);
    CHECK(reciprocal_gamma(-7.0) == 0.0);
    for (double x : {0.3, 1.0, 2.5, 17.0})
        CHECK(reciprocal_gamma(x) == doctest::Approx(1.0 / gamma_fn(x)).epsilon(1e-13));
    // Reflection branch: 1/Gamma(-0.5) = -1/(2 sqrt(pi)) * ... check against
    // Gamma(-0.5) = -2 sqrt(pi).
    CHECK(reciprocal_gamma(-0.5) == doctest::Approx(-1.0 / (2.0 * std::sqrt(M_PI))).epsilon(1e-13));
}

TEST_CASE("mittag_leffler: closed forms") {
    CHECK(oracles::rel_err(mittag_leffler(1.0, 1.0, 1.0), 2.71828182845904523536) < 1e-13);
    // Only the k = 0 term survives at z = 0.
    CHECK(mittag_leffler(0.7, 1.3, 0.0) == doctest::Approx(reciprocal_gamma(1.3)).epsilon(1e-15));
    // E_{1/2,1}(1) = e * erfc(-1), frozen from an extended-precision evaluation.
    CHECK(oracles::rel_err(mittag_leffler(0.5, 1.0, 1.0), 5.00898008076228346631) < 1e-13);
}

TEST_CASE("mittag_leffler vs extended-precision series oracle") {
    // Tolerance scales with the series' cancellation factor (peak term over
    // result), the intrinsic limit of any fixed-precision direct summation.
    int checked = 0;
    for (double alpha : {0.3, 0.5, 0.75, 1.0})
        for (double beta : {0.5, 1.0, 1.7})
            for (double z : {-3.0, -1.0, -0.1, 0.5, 2.0, 4.5}) {
                long double peak = 0.0L;
                long double want = oracles::ml_series(alpha, beta, z, 500, &peak);
                double cancel = static_cast<double>(peak / (1.0L + std::fabs(want)));
                if (cancel > 1e8) continue;  // not certifiable in double either way
                // Floor covers the exp(+-large) per-term rounding at big z;
                // alternating sums degrade with the cancellation factor.
                double tol = std::max(5e-13, 2e-12 * cancel);
                CHECK(oracles::rel_err(mittag_leffler(alpha, beta, z),
                                       static_cast<double>(want)) < tol);
                ++checked;
            }
    CHECK(checked >= 66);  // the skip rule may drop only the extreme corner
}

TEST_CASE("mittag_leffler error paths") {
    CHECK_THROWS_AS(mittag_leffler(0.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(mittag_leffler(0.5, 0.0, 1.0), DomainError);
    // alpha = 0.2, z = -4: the direct series needs catastrophic cancellation;
    // the evaluator must refuse rather than return noise.
    CHECK_THROWS_AS(mittag_leffler(0.2, 1.0, -4.0), ConvergenceError);
    // alpha = 0.3, z = -3: representable terms, but the alternating sum
    // leaves no certifiable digits in double precision.
    CHECK_THROWS_AS(mittag_leffler(0.3, 0.5, -3.0), ConvergenceError);
}

TEST_CASE("mittag_leffler_matrix: zero, classical and nilpotent cases") {
    Mat Z = Mat::Zero(3, 3);
    Mat got = mittag_leffler_matrix(0.6, 0.9, Z, 2.0);
    CHECK((got - reciprocal_gamma(0.9) * Mat::Identity(3, 3)).norm() < 1e-14);

    // alpha = beta = 1 reduces to the matrix exponential.
    Mat A = oracles::random_matrix(3, 3);
    for (double t : {0.3, 1.0, 2.0}) {
        Mat e = oracles::expm(Mat(A * t));
        CHECK((mittag_leffler_matrix(1.0, 1.0, A, t) - e).norm() < 1e-11 * e.norm());
    }

    // A^2 = 0: the series truncates after two terms.
    Mat Nl(2, 2);
    Nl << 0, 1, 0, 0;
    for (double t : {0.25, 1.0, 3.0}) {
        Mat want = Mat::Identity(2, 2) + Nl * std::pow(t, 0.5) / gamma_fn(1.5);
        CHECK((mittag_leffler_matrix(0.5, 1.0, Nl, t) - want).norm() < 1e-13 * want.norm());
    }
}

TEST_CASE("mittag_leffler_matrix: scalar consistency and commutation") {
    for (double alpha : {0.4, 0.8})
        for (double beta : {0.6, 1.2})
            for (double c : {-1.5, 0.7})
                for (double t : {0.5, 2.0}) {
                    Mat C(1, 1);
                    C << c;
                    double z = c * std::pow(t, alpha);
                    long double peak = 0.0L;
                    long double ref = oracles::ml_series(alpha, beta, z, 500, &peak);
                    double cancel = static_cast<double>(peak / (1.0L + std::fabs(ref)));
                    double want = mittag_leffler(alpha, beta, z);
                    // Two independent summation orders agree up to the
                    // cancellation-scaled rounding of each.
                    CHECK(oracles::rel_err(mittag_leffler_matrix(alpha, beta, C, t)(0, 0), want) <
                          1e-13 * std::max(1.0, 40.0 * cancel));
                }

    for (int trial = 0; trial < 25; ++trial) {
        Mat A = oracles::random_matrix(3, 3);
        double alpha = oracles::uniform(0.3, 1.0);
        double beta = oracles::uniform(0.3, 1.5);
        double t = oracles::uniform(0.1, 2.0);
        Mat E = mittag_leffler_matrix(alpha, beta, A, t);
        CHECK((A * E - E * A).norm() <= 1e-12 * A.norm() * E.norm());
    }
}

TEST_CASE("alpha_exponential: classical limit and closed forms") {
    Mat A = oracles::random_matrix(2, 2);
    Mat e = oracles::expm(A);
    CHECK((alpha_exponential(1.0, A, 1.0) - e).norm() < 1e-11 * e.norm());

    // Nilpotent example: e_alpha^{As} = [[s^{-1/2}/sqrt(pi), 1], [0, s^{-1/2}/sqrt(pi)]].
    Mat Nl(2, 2);
    Nl << 0, 1, 0, 0;
    for (double s : {0.3, 1.0, 1.7}) {
        Mat got = alpha_exponential(0.5, Nl, s);
        double d = std::pow(s, -0.5) / std::sqrt(M_PI);
        CHECK(got(0, 0) == doctest::Approx(d).epsilon(1e-13));
        CHECK(got(1, 1) == doctest::Approx(d).epsilon(1e-13));
        CHECK(got(0, 1) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(got(1, 0) == 0.0);
        // Its product with B = (0,1)^T is (1, 1/sqrt(pi s))^T.
        Vec B(2);
        B << 0, 1;
        Vec k = got * B;
        CHECK(k(0) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(k(1) == doctest::Approx(1.0 / std::sqrt(M_PI * s)).epsilon(1e-13));
    }

    // Scalar zero matrix: t^{-1/2} / Gamma(1/2).
    Mat z1 = Mat::Zero(1, 1);
    CHECK(alpha_exponential(0.5, z1, 0.8)(0, 0) ==
          doctest::Approx(std::pow(0.8, -0.5) / gamma_fn(0.5)).epsilon(1e-13));

    CHECK_THROWS_AS(alpha_exponential(0.5, A, 0.0), DomainError);
    CHECK_THROWS_AS(alpha_exponential(0.5, A, -1.0), DomainError);
}

TEST_CASE("alpha_exponential: d/dt E_alpha(A t^alpha) = A e_alpha^{At}") {
    Mat A = oracles::random_matrix(2, 2);
    double alpha = 0.6, t = 0.9, h = 1e-5;
    Mat lhs = (mittag_leffler_matrix(alpha, 1.0, A, t + h) -
               mittag_leffler_matrix(alpha, 1.0, A, t - h)) /
              (2.0 * h);
    Mat rhs = A * alpha_exponential(alpha, A, t);
    CHECK((lhs - rhs).norm() <= 1e-6 * rhs.norm());
}

TEST_CASE("memory_kernel: paper-grade closed forms and t = 0 rules") {
    Mat Nl(2, 2);
    Nl << 0, 1, 0, 0;
    // alpha = beta = 0.5: Phi(t) = [[1, 2 sqrt(t)/sqrt(pi)], [0, 1]].
    Order half(0.5, 0.5);
    for (double t : {0.2, 1.0, 2.5}) {
        Mat got = memory_kernel(half, Nl, t);
        CHECK(got(0, 0) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(got(1, 1) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(got(0, 1) == doctest::Approx(2.0 * std::sqrt(t) / std::sqrt(M_PI)).epsilon(1e-13));
        CHECK(got(1, 0) == 0.0);
    }
    CHECK((memory_kernel(half, Nl, 0.0) - Mat::Identity(2, 2)).norm() == 0.0);

    // Scalar A = 0: Phi(t) = t^{alpha+beta-1} / Gamma(alpha+beta).
    Mat z1 = Mat::Zero(1, 1);
    Order ord(0.7, 0.9);
    for (double t : {0.4, 1.3})
        CHECK(memory_kernel(ord, z1, t)(0, 0) ==
              doctest::Approx(std::pow(t, 0.6) / gamma_fn(1.6)).epsilon(1e-13));

    // beta = 1 - alpha collapses to the one-parameter function.
    Mat A = oracles::random_matrix(3, 3);
    Order flat(0.6, 0.4);
    for (double t : {0.5, 1.5}) {
        Mat want = mittag_leffler_matrix(0.6, 1.0, A, t);
        CHECK((memory_kernel(flat, A, t) - want).norm() < 1e-13 * want.norm());
    }

    CHECK((memory_kernel(Order(0.5, 1.0), Nl, 0.0)).norm() == 0.0);
    CHECK_THROWS_AS(memory_kernel(Order(0.5, 0.2), Nl, 0.0), DomainError);
}

TEST_CASE("Order invariants") {
    CHECK_THROWS_AS(Order(0.0, 0.5), DomainError);
    CHECK_THROWS_AS(Order(1.2, 0.5), DomainError);
    CHECK_THROWS_AS(Order(0.5, -0.1), DomainError);
    CHECK(Order(0.5, 0.5).memory_semantics());
    CHECK(!Order(0.5, 0.2).memory_semantics());
    CHECK(Order(1.0, 0.0).memory_semantics());
}

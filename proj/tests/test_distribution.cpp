#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "uab/distribution.hpp"
#include "uab/random.hpp"

using uab::DiscreteDistribution;
using uab::GaussianBelief;

namespace {

DiscreteDistribution make(std::initializer_list<double> w) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(w.size()));
    Eigen::Index i = 0;
    for (double x : w) v[i++] = x;
    return DiscreteDistribution(v);
}

DiscreteDistribution random_distribution(uab::Rng& rng, Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(0.05, 1.0);
    return DiscreteDistribution::normalized(v);
}

}  // namespace

TEST_SUITE("distribution") {

TEST_CASE("constructor validates weights") {
    Eigen::VectorXd bad(2);
    bad << 0.5, 0.6;
    CHECK_THROWS_AS(DiscreteDistribution{bad}, std::invalid_argument);
    bad << -0.1, 1.1;
    CHECK_THROWS_AS(DiscreteDistribution{bad}, std::invalid_argument);
    Eigen::VectorXd nan(2);
    nan << std::numeric_limits<double>::quiet_NaN(), 1.0;
    CHECK_THROWS_AS(DiscreteDistribution{nan}, std::invalid_argument);
    CHECK_THROWS_AS(DiscreteDistribution{Eigen::VectorXd{}}, std::invalid_argument);
}

TEST_CASE("normalized rescales raw mass") {
    Eigen::VectorXd raw(3);
    raw << 2.0, 2.0, 4.0;
    const auto d = DiscreteDistribution::normalized(raw);
    CHECK(d.weight(0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(d.weight(2) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("likelihood_distribution normalizes nonnegative values") {
    Eigen::VectorXd vals(2);
    vals << 2.0, 6.0;
    const auto l = uab::likelihood_distribution(vals);
    CHECK(l.weight(0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(l.weight(1) == doctest::Approx(0.75).epsilon(1e-14));

    Eigen::VectorXd zeros = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(uab::likelihood_distribution(zeros), std::invalid_argument);
    Eigen::VectorXd neg(2);
    neg << -1.0, 2.0;
    CHECK_THROWS_AS(uab::likelihood_distribution(neg), std::invalid_argument);
}

TEST_CASE("alpha_scale sharpens and flattens discrete mass") {
    const auto h = make({0.4, 0.6});
    const auto sharp = uab::alpha_scale(h, 2.0);
    // 0.16 / 0.52 and 0.36 / 0.52
    CHECK(sharp.weight(0) == doctest::Approx(0.3076923076923077).epsilon(1e-12));
    CHECK(sharp.weight(1) == doctest::Approx(0.6923076923076923).epsilon(1e-12));

    const auto flat = uab::alpha_scale(make({0.2, 0.8}), 0.6);
    const double c = std::pow(0.2, 0.6) + std::pow(0.8, 0.6);
    CHECK(flat.weight(0) == doctest::Approx(std::pow(0.2, 0.6) / c).epsilon(1e-12));
    CHECK(flat.weight(0) == doctest::Approx(0.3032695450229276).epsilon(1e-10));
    CHECK(flat.weight(1) == doctest::Approx(0.6967304549770723).epsilon(1e-10));
}

TEST_CASE("alpha_scale at one is the identity, bit for bit") {
    const auto h = make({0.123, 0.456, 0.421});
    const auto same = uab::alpha_scale(h, 1.0);
    for (Eigen::Index i = 0; i < h.size(); ++i) {
        CHECK(same.weight(i) == h.weight(i));
    }
}

TEST_CASE("alpha_scale at zero flattens over the support only") {
    Eigen::VectorXd w(3);
    w << 0.5, 0.0, 0.5;
    const auto h = DiscreteDistribution(w);
    const auto flat = uab::alpha_scale(h, 0.0);
    CHECK(flat.weight(0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(flat.weight(1) == 0.0);
    CHECK(flat.weight(2) == doctest::Approx(0.5).epsilon(1e-14));

    const auto full = uab::alpha_scale(make({0.2, 0.8}), 0.0);
    CHECK(full.weight(0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("uniform distributions are fixed points of scaling") {
    const auto u = DiscreteDistribution::uniform(5);
    for (double alpha : {0.0, 0.3, 1.0, 2.7, 10.0}) {
        const auto scaled = uab::alpha_scale(u, alpha);
        for (Eigen::Index i = 0; i < 5; ++i) {
            CHECK(scaled.weight(i) == doctest::Approx(0.2).epsilon(1e-14));
        }
    }
}

TEST_CASE("large alpha concentrates on the mode") {
    const auto h = make({0.2, 0.8});
    const auto peaked = uab::alpha_scale(h, 50.0);
    CHECK(peaked.weight(1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(peaked.weight(0) < 1e-29);
}

TEST_CASE("alpha_scale rejects negative exponents") {
    CHECK_THROWS_AS(uab::alpha_scale(make({0.4, 0.6}), -0.5), std::domain_error);
}

TEST_CASE("alpha_scale keeps atoms attached") {
    Eigen::VectorXd w(2);
    w << 0.4, 0.6;
    Eigen::VectorXd atoms(2);
    atoms << -1.0, 3.0;
    const DiscreteDistribution h(w, atoms);
    const auto scaled = uab::alpha_scale(h, 2.0);
    CHECK(scaled.atoms()[0] == -1.0);
    CHECK(scaled.atoms()[1] == 3.0);
    CHECK(scaled.mean() == doctest::Approx(-0.3076923076923077 + 3.0 * 0.6923076923076923)
                               .epsilon(1e-12));
}

TEST_CASE("gaussian alpha_scale divides the covariance") {
    const GaussianBelief g(1.5, 2.0);
    const auto scaled = uab::alpha_scale(g, 4.0);
    CHECK(scaled.scalar_mean() == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(scaled.scalar_variance() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(uab::alpha_scale(g, 0.0), std::domain_error);
    CHECK_THROWS_AS(uab::alpha_scale(g, -1.0), std::domain_error);
}

TEST_CASE("discrete entropy matches closed forms") {
    CHECK(uab::entropy(DiscreteDistribution::uniform(4)) ==
          doctest::Approx(std::log(4.0)).epsilon(1e-14));
    Eigen::VectorXd point(2);
    point << 1.0, 0.0;
    CHECK(uab::entropy(DiscreteDistribution(point)) == 0.0);
    // -(0.25 ln 0.25 + 0.75 ln 0.75)
    CHECK(uab::entropy(make({0.25, 0.75})) ==
          doctest::Approx(0.5623351446188083).epsilon(1e-12));
}

TEST_CASE("gaussian entropy matches closed forms") {
    CHECK(uab::entropy(GaussianBelief(0.0, 1.0)) ==
          doctest::Approx(1.4189385332046727).epsilon(1e-13));
    // After scaling N(mu, s^2) by alpha the entropy is ln(2 pi s^2 / alpha)/2 + 1/2.
    const double s2 = 2.0;
    const double alpha = 3.0;
    const auto scaled = uab::alpha_scale(GaussianBelief(0.7, s2), alpha);
    CHECK(uab::entropy(scaled) ==
          doctest::Approx(0.5 * std::log(2.0 * M_PI * s2 / alpha) + 0.5).epsilon(1e-13));
}

TEST_CASE("entropy of a scaled distribution strictly decreases in alpha") {
    uab::Rng rng(20240811);
    for (int trial = 0; trial < 20; ++trial) {
        const auto h = random_distribution(rng, 4);
        double prev = std::numeric_limits<double>::infinity();
        for (int i = 2; i <= 30; ++i) {
            const double alpha = static_cast<double>(i) / 10.0;
            const double ent = uab::entropy(uab::alpha_scale(h, alpha));
            CHECK(ent < prev);
            prev = ent;
        }
    }
    // Gaussian case: entropy is ln(2 pi s^2/alpha)/2 + 1/2, decreasing in alpha.
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 30; ++i) {
        const double ent =
            uab::entropy(uab::alpha_scale(GaussianBelief(0.0, 1.3), static_cast<double>(i) / 10.0));
        CHECK(ent < prev);
        prev = ent;
    }
}

TEST_CASE("entropy gain changes sign at alpha equal one") {
    uab::Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const auto h = random_distribution(rng, 5);
        const double base = uab::entropy(h);
        for (int i = 1; i <= 30; ++i) {
            const double alpha = static_cast<double>(i) / 10.0;
            const double gain = uab::entropy(uab::alpha_scale(h, alpha)) - base;
            if (alpha < 1.0) {
                CHECK(gain > 0.0);
            } else if (alpha == 1.0) {
                CHECK(gain == 0.0);  // exact: scaling by one is the identity
            } else {
                CHECK(gain < 0.0);
            }
        }
    }
}

TEST_CASE("discrete KL matches closed forms and flags support violations") {
    CHECK(uab::kl_divergence(make({0.5, 0.5}), make({0.25, 0.75})) ==
          doctest::Approx(0.14384103622589045).epsilon(1e-13));
    const auto h = make({0.3, 0.2, 0.5});
    CHECK(uab::kl_divergence(h, h) == 0.0);

    Eigen::VectorXd a(3);
    a << 0.5, 0.5, 0.0;
    Eigen::VectorXd b(3);
    b << 0.0, 0.5, 0.5;
    const double violated = uab::kl_divergence(DiscreteDistribution(a), DiscreteDistribution(b));
    CHECK(std::isinf(violated));
    // The reverse direction is fine only when support(a) covers support(b)'s mass.
    const double reverse = uab::kl_divergence(DiscreteDistribution(b), DiscreteDistribution(a));
    CHECK(std::isinf(reverse));
}

TEST_CASE("KL is nonnegative and zero only at equality") {
    uab::Rng rng(999);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = random_distribution(rng, 6);
        const auto b = random_distribution(rng, 6);
        const double kl = uab::kl_divergence(a, b);
        CHECK(kl >= 0.0);
        CHECK(uab::kl_divergence(a, a) == 0.0);
    }
}

TEST_CASE("gaussian KL matches closed forms") {
    CHECK(uab::kl_divergence(GaussianBelief(0.0, 1.0), GaussianBelief(0.0, 0.5)) ==
          doctest::Approx(0.15342640972002733).epsilon(1e-13));
    // KL(N(0, I) || N([1 1], 2I)) = ln(2) in two dimensions.
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(2);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
    CHECK(uab::kl_divergence(GaussianBelief(zero, eye), GaussianBelief(ones, 2.0 * eye)) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-13));
    CHECK(uab::kl_divergence(GaussianBelief(1.0, 2.0), GaussianBelief(1.0, 2.0)) ==
          doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("KL to the scaled self has the closed form ln C_alpha plus (alpha-1) entropy") {
    uab::Rng rng(424242);
    for (int trial = 0; trial < 20; ++trial) {
        const auto h = random_distribution(rng, 5);
        for (double alpha : {0.2, 0.5, 0.9, 1.5, 2.0, 4.0}) {
            double c_alpha = 0.0;
            for (Eigen::Index i = 0; i < h.size(); ++i) {
                c_alpha += std::pow(h.weight(i), alpha);
            }
            const double expected = std::log(c_alpha) + (alpha - 1.0) * uab::entropy(h);
            CHECK(uab::kl_divergence(h, uab::alpha_scale(h, alpha)) ==
                  doctest::Approx(expected).epsilon(1e-11));
        }
    }
}

TEST_CASE("KL to the scaled self is monotone on both sides of one and convex") {
    uab::Rng rng(515151);
    for (int trial = 0; trial < 10; ++trial) {
        const auto h = random_distribution(rng, 4);
        auto g = [&](double alpha) { return uab::kl_divergence(h, uab::alpha_scale(h, alpha)); };
        CHECK(g(1.0) == 0.0);
        double prev = g(0.05);
        for (double alpha = 0.1; alpha < 0.999; alpha += 0.05) {
            const double cur = g(alpha);
            CHECK(cur < prev);
            prev = cur;
        }
        prev = g(1.05);
        for (double alpha = 1.1; alpha < 3.001; alpha += 0.05) {
            const double cur = g(alpha);
            CHECK(cur > prev);
            prev = cur;
        }
        for (double alpha = 0.2; alpha < 2.8; alpha += 0.3) {
            const double mid = g(alpha + 0.15);
            CHECK(mid <= 0.5 * (g(alpha) + g(alpha + 0.3)) + 1e-10);
        }
    }
}

TEST_CASE("gaussian KL under scaling follows -ln(alpha)/2 + alpha/2 - 1/2") {
    const GaussianBelief h(0.3, 1.7);
    for (double alpha : {0.25, 0.5, 1.0, 2.0, 5.0}) {
        const double expected = -0.5 * std::log(alpha) + 0.5 * alpha - 0.5;
        CHECK(uab::kl_divergence(h, uab::alpha_scale(h, alpha)) ==
              doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("support and uniformity helpers") {
    Eigen::VectorXd a(3);
    a << 0.5, 0.5, 0.0;
    Eigen::VectorXd b(3);
    b << 0.25, 0.25, 0.5;
    CHECK(DiscreteDistribution(a).support_subset_of(DiscreteDistribution(b)));
    CHECK_FALSE(DiscreteDistribution(b).support_subset_of(DiscreteDistribution(a)));
    CHECK(DiscreteDistribution(a).is_uniform_on_support());
    CHECK(DiscreteDistribution::uniform(7).is_uniform_on_support());
    CHECK_FALSE(DiscreteDistribution(b).is_uniform_on_support());
}

TEST_CASE("gaussian belief validates its covariance") {
    Eigen::MatrixXd notspd(2, 2);
    notspd << 1.0, 2.0, 2.0, 1.0;  // symmetric but indefinite
    CHECK_THROWS_AS(GaussianBelief(Eigen::VectorXd::Zero(2), notspd), std::invalid_argument);
    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.5, -0.5, 1.0;
    CHECK_THROWS_AS(GaussianBelief(Eigen::VectorXd::Zero(2), asym), std::invalid_argument);
    CHECK_THROWS_AS(GaussianBelief(0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(GaussianBelief(0.0, -1.0), std::invalid_argument);
}

}  // TEST_SUITE

#include "support.hpp"

#include "icsel/errors.hpp"
#include "icsel/selective.hpp"
#include "icsel/truncnorm.hpp"

#include <doctest.h>

#include <cmath>

using namespace icsel;
using namespace testing;

namespace {

LassoFit manual_fit(std::initializer_list<double> beta, double lambda, std::size_t n) {
    LassoFit fit;
    fit.beta = Vector(static_cast<Eigen::Index>(beta.size()));
    Eigen::Index j = 0;
    for (double b : beta) fit.beta[j++] = b;
    fit.penalty = PenaltyConfig::fixed(lambda);
    fit.n = n;
    fit.score = Vector::Zero(fit.beta.size());
    return fit;
}

InfoEstimate manual_info(const Matrix& m, InfoMethod method = InfoMethod::SPRES) {
    InfoEstimate e;
    e.matrix = m;
    e.method = method;
    e.symmetrized = true;
    return e;
}

PivotSpec untruncated(double sigma2) {
    return polyhedral_pivot(Matrix(0, 1), Vector(0), Vector::Ones(1), Matrix::Constant(1, 1, sigma2),
                            Vector::Zero(1));
}

// Random polyhedral pivot with y inside {A y <= b}.
PivotSpec random_spec(std::mt19937_64& rng, Vector& y) {
    std::uniform_int_distribution<int> dim(1, 3);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int k = dim(rng);
    const int rows = k + dim(rng);
    Matrix a(rows, k);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
    y = Vector(k);
    for (int i = 0; i < k; ++i) y[i] = normal(rng);
    std::uniform_real_distribution<double> slack(0.05, 1.5);
    Vector b = a * y;
    for (int i = 0; i < rows; ++i) b[i] += slack(rng);
    Matrix l(k, k);
    for (Eigen::Index i = 0; i < l.size(); ++i) l.data()[i] = normal(rng);
    const Matrix sigma = l * l.transpose() + 0.5 * Matrix::Identity(k, k);
    Vector gamma(k);
    for (int i = 0; i < k; ++i) gamma[i] = normal(rng);
    return polyhedral_pivot(a, b, gamma, sigma, y);
}

} // namespace

TEST_CASE("one-step estimator") {
    const auto fit = manual_fit({0.5}, 10.0, 100);
    SelectionEvent sel{{0}, {1}};
    CHECK(one_step_estimator(fit, sel, manual_info(Matrix::Constant(1, 1, 100.0)))[0] == doctest::Approx(0.6));

    const auto fit0 = manual_fit({0.5, -0.2}, 0.0, 100);
    SelectionEvent sel2{{0, 1}, {1, -1}};
    Matrix info(2, 2);
    info << 50.0, 10.0, 10.0, 40.0;
    const Vector b0 = one_step_estimator(fit0, sel2, manual_info(info));
    CHECK(b0[0] == 0.5);
    CHECK(b0[1] == -0.2);

    const auto fit1 = manual_fit({0.5, -0.2}, 3.0, 100);
    const Vector b1 = one_step_estimator(fit1, sel2, manual_info(Matrix(Vector(Vector::Constant(2, 30.0)).asDiagonal())));
    CHECK(b1[0] - 0.5 > 0.0);
    CHECK(b1[1] + 0.2 < 0.0);

    Matrix bad(2, 2);
    bad << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(one_step_estimator(fit1, sel2, manual_info(bad)), NotPositiveDefinite);
}

TEST_CASE("truncation limits: single active constraint") {
    const double b0 = 0.7;
    const auto [lo, hi] = truncation_limits(Matrix::Constant(1, 1, -1.0), Vector::Constant(1, b0),
                                            Vector::Ones(1), Vector::Zero(1));
    CHECK(lo == -b0);
    CHECK(hi == kInf);
    CHECK_THROWS_AS(truncation_limits(Matrix::Zero(1, 1), Vector::Constant(1, -1.0), Vector::Ones(1), Vector::Zero(1)),
                    EmptyTruncation);
    Matrix a(2, 1);
    a << -1.0, 1.0;
    Vector b(2);
    b << -2.0, 1.0;
    CHECK_THROWS_AS(truncation_limits(a, b, Vector::Ones(1), Vector::Zero(1)), EmptyTruncation);
}

TEST_CASE("truncation limits agree with a grid over the line") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int k = 1 + trial % 3;
        const int rows = k + trial % 4;
        Matrix a(rows, k);
        for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
        Vector c(k), z(k), b(rows);
        for (int i = 0; i < k; ++i) {
            c[i] = normal(rng);
            z[i] = normal(rng);
        }
        b = a * z;
        for (int i = 0; i < rows; ++i) b[i] += std::abs(normal(rng)) + 0.01;  // t = 0 feasible
        const auto [lo, hi] = truncation_limits(a, b, c, z);
        const double step = 1e-3;
        double glo = kInf, ghi = -kInf;
        for (int g = -20000; g <= 20000; ++g) {
            const double t = g * step;
            if (((a * (z + c * t)) - b).maxCoeff() <= 0.0) {
                glo = std::min(glo, t);
                ghi = std::max(ghi, t);
            }
        }
        // the grid only sees [-20, 20]
        CHECK(std::abs(glo - std::max(lo, -20.0)) <= step);
        CHECK(std::abs(ghi - std::min(hi, 20.0)) <= step);
    }
}

TEST_CASE("pivot algebra") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        Vector y;
        const auto spec = random_spec(rng, y);
        CHECK(std::abs(spec.gamma.dot(spec.c) - 1.0) <= 1e-10);
        CHECK(std::abs(spec.gamma.dot(spec.z)) <= 1e-8 * std::max(1.0, y.norm()));
        CHECK(spec.vminus < spec.vplus);
    }
}

TEST_CASE("build pivot with coordinate contrasts") {
    SelectionEvent sel{{0, 2}, {1, -1}};
    Matrix info(3, 3);
    info << 200.0, 20.0, 10.0, 20.0, 150.0, -5.0, 10.0, -5.0, 120.0;
    const double n = 100.0, lambda = 8.0;
    Matrix block(2, 2);
    block << 2.0, 0.1, 0.1, 1.2;
    const Matrix inv = block.inverse();
    Vector theta(2);
    theta << 2.0, -1.5;
    for (Eigen::Index j = 0; j < 2; ++j) {
        const Vector gamma = Vector::Unit(2, j);
        const auto spec = build_pivot(theta, sel, manual_info(info), lambda, 100, gamma);
        CHECK(spec.sigma2 == doctest::Approx(inv(j, j)).epsilon(1e-12));
        Vector s(2);
        s << 1.0, -1.0;
        const Vector b = -(lambda / std::sqrt(n)) * s.cwiseProduct(inv * s);
        CHECK((spec.b - b).lpNorm<Eigen::Infinity>() <= 1e-12);
        CHECK(spec.A == -Matrix(s.asDiagonal()));
    }
    // scalar model reduces to the single-constraint example
    SelectionEvent one{{1}, {1}};
    const auto spec = build_pivot(Vector::Constant(1, 3.0), one, manual_info(info), lambda, 100, Vector::Ones(1));
    CHECK(spec.vminus == doctest::Approx((lambda / 10.0) / 1.5).epsilon(1e-12));
    CHECK(spec.vplus == kInf);
}

TEST_CASE("p-values") {
    const auto spec = untruncated(1.0);
    CHECK(selective_pvalue(spec, Vector::Zero(1)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(selective_pvalue(spec, Vector::Constant(1, norm_quantile(0.975))) == doctest::Approx(0.05).epsilon(1e-10));
    CHECK(selective_pvalue(spec, Vector::Constant(1, 2.0), 2.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("untruncated interval is the Wald interval") {
    for (double sigma2 : {0.3, 1.0, 7.0}) {
        const auto spec = untruncated(sigma2);
        const double x = 1.7;
        const auto [lo, hi] = selective_ci(spec, Vector::Constant(1, x), 0.05);
        const double half = norm_quantile(0.975) * std::sqrt(sigma2);
        CHECK(std::abs(lo - (x - half)) <= 1e-6 * std::sqrt(sigma2));
        CHECK(std::abs(hi - (x + half)) <= 1e-6 * std::sqrt(sigma2));
    }
}

TEST_CASE("intervals: ordering, nesting and duality with p-values") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        Vector y;
        const auto spec = random_spec(rng, y);
        const auto [lo, hi] = selective_ci(spec, y, 0.05);
        const auto [lo2, hi2] = selective_ci(spec, y, 0.2);
        CHECK(lo < hi);
        CHECK(lo <= lo2);
        CHECK(hi2 <= hi);
        const double sigma = std::sqrt(spec.sigma2);
        for (int k = 0; k < 10; ++k) {
            const double null = spec.gamma.dot(y) + 4 * sigma * normal(rng);
            const double p = selective_pvalue(spec, y, null);
            const bool inside = lo <= null && null <= hi;
            const double f = pivot_cdf(spec, y, null);
            // near the boundary the root tolerance decides; skip that band
            if (std::abs(f - 0.025) <= 1e-8 || std::abs(f - 0.975) <= 1e-8) continue;
            CHECK(inside == (p >= 0.05));
        }
    }
}

TEST_CASE("infer_all") {
    SUBCASE("empty selection") {
        const auto fit = manual_fit({0.0, 0.0}, 5.0, 50);
        const auto rep = infer_all(fit, SelectionEvent{}, manual_info(Matrix::Identity(2, 2)),
                                   manual_info(Matrix::Identity(2, 2)), 0.05);
        CHECK(rep.coordinates.empty());
        CHECK(rep.status.find("empty") != std::string::npos);
    }
    SUBCASE("scalar pipeline assembled by hand") {
        const auto d = generated_dataset(120, 1, 3);
        const auto fit = lasso_fit(d, PenaltyConfig::fixed(5.0));
        const auto sel = extract_selection(fit);
        REQUIRE(sel.size() == 1);
        const auto info = info_spres(d, fit);
        const auto rep = infer_all(fit, sel, info, info, 0.1);
        REQUIRE(rep.coordinates.size() == 1);
        const auto& c = rep.coordinates[0];

        const double n = 120.0, lambda = 5.0, i11 = info.matrix(0, 0);
        const double s = sel.signs[0];
        const double bar = fit.beta[0] + lambda * s / i11;
        const double theta = std::sqrt(n) * bar;
        const double sigma2 = n / i11;
        const double bound = -(lambda / std::sqrt(n)) * s * sigma2 * s;  // -s theta <= bound
        double lo = -kInf, hi = kInf;
        if (s > 0) lo = -bound;
        else hi = bound;
        const double f0 = truncated_normal_cdf(theta, 0.0, sigma2, lo, hi);
        CHECK(c.one_step == doctest::Approx(bar).epsilon(1e-12));
        CHECK(c.theta_bar == doctest::Approx(theta).epsilon(1e-12));
        CHECK(c.vminus == doctest::Approx(lo).epsilon(1e-12));
        CHECK(c.p_value == doctest::Approx(2 * std::min(f0, 1 - f0)).epsilon(1e-9));
        const double f_low = truncated_normal_cdf(theta, c.ci_low * std::sqrt(n), sigma2, lo, hi);
        const double f_high = truncated_normal_cdf(theta, c.ci_high * std::sqrt(n), sigma2, lo, hi);
        CHECK(std::abs(f_low - 0.95) <= 1e-7);
        CHECK(std::abs(f_high - 0.05) <= 1e-7);
    }
    SUBCASE("information block that is not positive definite") {
        const auto fit = manual_fit({0.3}, 5.0, 50);
        CHECK_THROWS_AS(infer_all(fit, SelectionEvent{{0}, {1}}, manual_info(Matrix::Constant(1, 1, -1.0)),
                                  manual_info(Matrix::Constant(1, 1, -1.0)), 0.05),
                        NotPositiveDefinite);
    }
}

TEST_CASE("target reduces to theta* when no signal is left out") {
    // theta_tilde = theta*_M + I_MM^{-1} I_{M,-M} theta*_{-M}
    Matrix info(3, 3);
    info << 2.0, 0.3, 0.1, 0.3, 1.5, 0.2, 0.1, 0.2, 1.0;
    Vector theta(3);
    theta << 1.0, -2.0, 0.0;
    const std::vector<Eigen::Index> m{0, 1};
    const Matrix imm = model_block(info, m);
    Vector coupling(2);
    coupling << info(0, 2), info(1, 2);
    const Vector target = theta.head(2) + imm.llt().solve(coupling * theta[2]);
    CHECK(target == theta.head(2));
}

TEST_CASE("error tags") {
    CHECK(error_tag(EmptyTruncation("x")) == "EmptyTruncation");
    CHECK(error_tag(NotPositiveDefinite("x")) == "NotPositiveDefinite");
    CHECK(error_tag(NonConvergence("x")) == "NonConvergence");
}

#include "semidiff/sampler.hpp"
#include "semidiff/task.hpp"

#include <doctest.h>

#include <cmath>

using namespace semidiff;

namespace {

ScoreField minus_x(double mu = 0.0) {
    // oracle of N(mu, I) under the OU forward process
    return {1, 1, [mu](const Mat& x, const Mat&, const Vec& t) {
                Mat out(x.rows(), x.cols());
                for (Eigen::Index i = 0; i < x.cols(); ++i)
                    out.col(i) = -(x.col(i).array() - std::exp(-t(i)) * mu).matrix();
                return out;
            }};
}

ScoreField zero_score() {
    return {1, 1, [](const Mat& x, const Mat&, const Vec&) { return Mat(Mat::Zero(x.rows(), x.cols())); }};
}

// Euler-Maruyama on the stationary OU reverse SDE is the AR(1) recursion
// v <- (1 - h)^2 v + 2 h from v = 1, with h = (3 - 1e-3) / n.
constexpr double kAr1Var10 = 1.1762602307858117;
constexpr double kAr1Var1000 = 1.0014980554169575;
// RK4 on dx = x over [1e-3, 3] with 1000 steps from x = 1.
constexpr double kRk4Growth1000 = 20.065461425645736;

double sample_var(const Mat& x) {
    const double m = x.mean();
    return (x.array() - m).square().sum() / static_cast<double>(x.size() - 1);
}

}  // namespace

TEST_CASE("reverse SDE with the standard normal oracle") {
    SamplerConfig cfg;
    cfg.n_steps = 500;
    Rng rng = make_rng(31);
    const int n = 100000;
    const Mat x = reverse_sde_sample(minus_x(), Mat(Mat::Zero(1, n)), cfg, rng);
    CHECK(std::abs(x.mean()) < 0.02);
    CHECK(sample_var(x) == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("reverse SDE with a shifted oracle") {
    SamplerConfig cfg;
    cfg.n_steps = 500;
    Rng rng = make_rng(32);
    const Mat x = reverse_sde_sample(minus_x(1.5), Mat(Mat::Zero(1, 50000)), cfg, rng);
    CHECK(std::abs(x.mean() - 1.5) < 0.03);
}

TEST_CASE("Euler-Maruyama variance matches the AR(1) recursion") {
    for (auto [steps, expected] : {std::pair{10, kAr1Var10}, std::pair{1000, kAr1Var1000}}) {
        SamplerConfig cfg;
        cfg.n_steps = steps;
        Rng rng = make_rng(33, {static_cast<std::uint64_t>(steps)});
        const int n = 100000;
        const Mat x = reverse_sde_sample(minus_x(), Mat(Mat::Zero(1, n)), cfg, rng);
        const double se = expected * std::sqrt(2.0 / n);
        INFO("steps = " << steps);
        CHECK(std::abs(sample_var(x) - expected) < 4.0 * se);
    }
}

TEST_CASE("flow ODE with a zero score grows by e^(T - t0)") {
    SamplerConfig cfg;
    cfg.kind = SamplerKind::ode;
    cfg.n_steps = 1000;
    const Mat one = Mat::Ones(1, 1);
    const double x = integrate_flow_ode(zero_score(), one, Mat::Zero(1, 1), cfg)(0, 0);
    CHECK(x == doctest::Approx(kRk4Growth1000).epsilon(1e-12));
    const double exact = std::exp(cfg.t_max - cfg.t0);
    CHECK(std::abs(x - exact) < 1e-9);

    cfg.n_steps = 40;
    const double e40 = std::abs(integrate_flow_ode(zero_score(), one, Mat::Zero(1, 1), cfg)(0, 0) - exact);
    cfg.n_steps = 80;
    const double e80 = std::abs(integrate_flow_ode(zero_score(), one, Mat::Zero(1, 1), cfg)(0, 0) - exact);
    // fourth order: halving the step cuts the error by about 16
    CHECK(e40 / e80 > 14.0);
    CHECK(e40 / e80 < 18.0);
}

TEST_CASE("truncation") {
    SamplerConfig cfg;
    cfg.n_steps = 500;
    const int n = 20000;

    SUBCASE("a huge radius accepts everything") {
        cfg.truncation = Truncation{1e6, 4, OverflowPolicy::fail};
        Rng rng = make_rng(34);
        const TruncatedBatch b = sample_truncated(minus_x(), Mat::Zero(1, n), cfg, rng);
        CHECK(b.acceptance_rate() == 1.0);
        CHECK(b.clipped == 0);
    }

    SUBCASE("unit radius keeps the one-sigma mass") {
        cfg.truncation = Truncation{1.0, 64, OverflowPolicy::clip};
        Rng rng = make_rng(35);
        const TruncatedBatch b = sample_truncated(minus_x(), Mat::Zero(1, n), cfg, rng);
        CHECK(b.accepted_count == static_cast<std::size_t>(n));
        CHECK(b.acceptance_rate() == doctest::Approx(0.6826894921370859).epsilon(0.015));
        CHECK(b.x.cwiseAbs().maxCoeff() <= 1.0);

        const int bins = 20;
        std::vector<double> hist(bins, 0.0);
        for (Eigen::Index i = 0; i < b.x.cols(); ++i) {
            const int k = std::min(bins - 1, static_cast<int>((b.x(0, i) + 1.0) / 2.0 * bins));
            hist[static_cast<std::size_t>(k)] += 1.0 / n;
        }
        const double z = normal_cdf(1.0) - normal_cdf(-1.0);
        double l1 = 0.0;
        for (int k = 0; k < bins; ++k) {
            const double lo = -1.0 + 2.0 * k / bins, hi = lo + 2.0 / bins;
            l1 += std::abs(hist[static_cast<std::size_t>(k)] - (normal_cdf(hi) - normal_cdf(lo)) / z);
        }
        CHECK(l1 < 0.03);
    }

    SUBCASE("exhausted retries under the fail policy throw") {
        cfg.truncation = Truncation{1.0, 10, OverflowPolicy::fail};
        Rng rng = make_rng(36);
        CHECK_THROWS_AS(sample_truncated(minus_x(6.0), Mat::Zero(1, 8), cfg, rng), SamplingError);
        cfg.truncation = Truncation{0.01, 10, OverflowPolicy::fail};
        CHECK_THROWS(sample_truncated(minus_x(), Mat::Zero(1, 8), cfg, rng));
    }

    SUBCASE("clip policy counts clipped columns") {
        cfg.truncation = Truncation{1.0, 2, OverflowPolicy::clip};
        Rng rng = make_rng(37);
        const TruncatedBatch b = sample_truncated(minus_x(6.0), Mat::Zero(1, 8), cfg, rng);
        CHECK(b.clipped == 8);
        CHECK(b.accepted_count == 0);
        CHECK(b.x.maxCoeff() == 1.0);
    }
}

TEST_CASE("sampler validation and determinism") {
    SamplerConfig cfg;
    cfg.n_steps = 9;
    Rng rng = make_rng(38);
    CHECK_THROWS_AS(reverse_sde_sample(minus_x(), Mat(Mat::Zero(1, 4)), cfg, rng), std::invalid_argument);
    cfg.n_steps = 50;
    cfg.t0 = 0.0;
    CHECK_THROWS(reverse_sde_sample(minus_x(), Mat(Mat::Zero(1, 4)), cfg, rng));
    cfg.t0 = 1e-3;
    cfg.truncation = Truncation{0.5, 1, OverflowPolicy::clip};
    CHECK_THROWS(cfg.validate());
    cfg.truncation.reset();

    Rng a = make_rng(39), b = make_rng(39);
    CHECK(reverse_sde_sample(minus_x(), Mat(Mat::Zero(1, 64)), cfg, a) ==
          reverse_sde_sample(minus_x(), Mat(Mat::Zero(1, 64)), cfg, b));
    cfg.kind = SamplerKind::ode;
    CHECK(sample_model(minus_x(), Mat::Zero(1, 64), cfg, a) == sample_model(minus_x(), Mat::Zero(1, 64), cfg, b));

    CHECK(default_truncation_radius(1000, 2) == doctest::Approx(std::sqrt(2.0 * std::log(2000.0)) + 2.0));

    ScoreField blowup{1, 1, [](const Mat& x, const Mat&, const Vec&) { return Mat(1e200 * x.array().square()); }};
    cfg.kind = SamplerKind::sde;
    CHECK_THROWS_AS(reverse_sde_sample(blowup, Mat(Mat::Zero(1, 4)), cfg, a), SamplingError);
}

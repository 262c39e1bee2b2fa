#include "semidiff/diffusion.hpp"
#include "semidiff/losses.hpp"
#include "semidiff/task.hpp"

#include <doctest.h>

#include <cmath>

using namespace semidiff;

namespace {

ConditionalTask shifted_normal(double mu) {
    return ConditionalTask::gaussian({Mat::Zero(1, 1), Vec::Constant(1, mu)}, Mat::Identity(1, 1));
}

ScoreField minus_x() {
    return {1, 1, [](const Mat& x, const Mat&, const Vec&) { return Mat(-x); }};
}

// ||mu||^2 (e^{-2 T0} - e^{-2 T}) / (2 (T - T0)) at mu = 1.5, T0 = 1e-3, T = 3,
// evaluated in double precision outside this code base.
constexpr double kShiftExcess = 0.3734456993337779;

}  // namespace

TEST_CASE("alpha and sigma2 closed forms") {
    CHECK(alpha(0.0) == 1.0);
    CHECK(alpha(std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(alpha(3.0) == doctest::Approx(0.049787068367863944).epsilon(1e-14));
    CHECK(sigma2(0.0) == 0.0);
    CHECK(sigma2(std::log(2.0)) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(sigma2(50.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(alpha(-1e-9), std::invalid_argument);
    CHECK_THROWS_AS(sigma2(-1.0), std::invalid_argument);
    for (int i = 0; i <= 2000; ++i) {
        const double t = 0.01 * i;
        CHECK(std::abs(alpha(t) * alpha(t) + sigma2(t) - 1.0) < 1e-12);
    }
}

TEST_CASE("schedule validation") {
    Schedule s;
    CHECK_NOTHROW(s.validate());
    s.t0 = 0.0;
    CHECK_THROWS(s.validate());
    s = Schedule{};
    s.t0 = 4.0;
    CHECK_THROWS(s.validate());
    s = Schedule{};
    s.n_mc = 0;
    CHECK_THROWS(s.validate());
}

TEST_CASE("forward kernel moments") {
    Rng rng = make_rng(11);
    Vec x0(2);
    x0 << 2.0, 0.0;
    CHECK((sample_forward(x0, 0.0, rng) - x0).norm() == 0.0);

    const int n = 100000;
    Mat draws(2, n);
    for (int i = 0; i < n; ++i) draws.col(i) = sample_forward(x0, 1.0, rng);
    const Vec mean = draws.rowwise().mean();
    const double tol = 3.0 * std::sqrt(sigma2(1.0) / n);
    CHECK(std::abs(mean(0) - 2.0 * std::exp(-1.0)) < tol);
    CHECK(std::abs(mean(1)) < tol);
    const Mat centered = draws.colwise() - mean;
    const Mat cov = centered * centered.transpose() / (n - 1);
    CHECK(cov(0, 0) == doctest::Approx(sigma2(1.0)).epsilon(0.05));
    CHECK(cov(1, 1) == doctest::Approx(sigma2(1.0)).epsilon(0.05));
    CHECK(std::abs(cov(0, 1)) < 0.05 * sigma2(1.0));
}

TEST_CASE("kernel score") {
    Vec x0 = Vec::Constant(1, 1.7);
    const double t = 0.4;
    CHECK(kernel_score(Vec(alpha(t) * x0), x0, t).norm() < 1e-15);
    // sigma_t^2 = 0.75 at t = ln 2
    CHECK(kernel_score(Vec::Constant(1, 1.0), Vec::Zero(1), std::log(2.0))(0) ==
          doctest::Approx(-4.0 / 3.0).epsilon(1e-14));
    CHECK_THROWS_AS(kernel_score(x0, x0, 0.0), std::invalid_argument);

    Rng rng = make_rng(12);
    for (double tt : {0.05, 0.5, 2.0}) {
        const int n = 100000;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const Vec xt = sample_forward(x0, tt, rng);
            acc += kernel_score(xt, x0, tt).squaredNorm();
        }
        CHECK(acc / n == doctest::Approx(1.0 / sigma2(tt)).epsilon(0.05));
    }
}

TEST_CASE("dsm loss with a per-draw cheating oracle is exactly zero") {
    Schedule sched;
    const Vec x = Vec::Constant(1, 0.3), y = Vec::Constant(1, 0.5);
    // The kernel score of the single data point x is the per-draw target.
    ScoreField cheat{1, 1, [&](const Mat& xt, const Mat&, const Vec& t) {
                         Mat out(xt.rows(), xt.cols());
                         for (Eigen::Index i = 0; i < xt.cols(); ++i) out.col(i) = kernel_score(xt.col(i), x, t(i));
                         return out;
                     }};
    Rng rng = make_rng(13);
    const LossEstimate l = dsm_loss(x, y, cheat, sched, rng);
    CHECK(l.value < 1e-12);
    CHECK(l.n_draws == static_cast<std::size_t>(sched.n_mc));
}

TEST_CASE("stationary target has zero excess") {
    Schedule sched;
    Rng rng = make_rng(14);
    const LossEstimate e = dsm_excess(shifted_normal(0.0), minus_x(), sched, 20000, rng);
    CHECK(std::abs(e.value) < 1e-12);
}

TEST_CASE("DSM identity against the closed-form shift excess") {
    Schedule sched;
    const ConditionalTask task = shifted_normal(1.5);
    Rng r1 = make_rng(15, {1});
    Rng r2 = make_rng(15, {2});
    const LossEstimate lp = population_error(task, minus_x(), sched, 20000, r1);
    const LossEstimate dsm = dsm_excess(task, minus_x(), sched, 20000, r2);
    CHECK(std::abs(lp.value - kShiftExcess) < 4.0 * lp.std_err);
    CHECK(std::abs(dsm.value - kShiftExcess) < 4.0 * dsm.std_err);
    CHECK(std::abs(lp.value - dsm.value) < 4.0 * std::hypot(lp.std_err, dsm.std_err));
}

TEST_CASE("population error of oracle and shifted oracle") {
    Schedule sched;
    const ConditionalTask task =
        ConditionalTask::gaussian({Mat::Constant(1, 1, 2.0), Vec::Constant(1, -1.0)}, Mat::Constant(1, 1, 0.3));
    Rng rng = make_rng(16);
    CHECK(population_error(task, task.oracle_field(), sched, 5000, rng).value < 1e-20);
    const ScoreField oracle = task.oracle_field();
    ScoreField shifted{1, 1, [&](const Mat& x, const Mat& y, const Vec& t) { return Mat(oracle(x, y, t).array() + 0.7); }};
    CHECK(population_error(task, shifted, sched, 5000, rng).value == doctest::Approx(0.49).epsilon(1e-9));
    CHECK_THROWS(population_error(task, oracle, sched, 0, rng));
}

TEST_CASE("stage-2 loss pairing") {
    Schedule sched;
    const ConditionalTask task =
        ConditionalTask::gaussian({Mat::Constant(1, 1, 1.0), Vec::Zero(1)}, Mat::Constant(1, 1, 0.5));
    Rng rng = make_rng(17);
    PseudoDataset pseudo;
    std::tie(pseudo.x, pseudo.y) = task.sample_pairs(2000, rng);
    const ScoreField h = task.oracle_field();

    Rng a = make_rng(18);
    CHECK(stage2_task_loss(pseudo, h, h, sched, a).value == 0.0);

    // f = h + c: paired estimate vs an unpaired brute-force estimate
    const double c = 0.4;
    ScoreField f{1, 1, [&](const Mat& x, const Mat& y, const Vec& t) { return Mat(h(x, y, t).array() + c); }};
    Rng b = make_rng(19);
    const LossEstimate paired = stage2_task_loss(pseudo, f, h, sched, b);
    Schedule big = sched;
    big.n_mc = 16;
    Rng c1 = make_rng(20, {1});
    Rng c2 = make_rng(20, {2});
    const DsmDraws df = draw_dsm(pseudo.x, pseudo.y, big, big.n_mc, c1);
    const DsmDraws dh = draw_dsm(pseudo.x, pseudo.y, big, big.n_mc, c2);
    const LossEstimate lf = LossEstimate::from_terms(dsm_terms(f, df));
    const LossEstimate lh = LossEstimate::from_terms(dsm_terms(h, dh));
    const double unpaired = lf.value - lh.value;
    CHECK(std::abs(paired.value - unpaired) < 4.0 * std::hypot(paired.std_err, std::hypot(lf.std_err, lh.std_err)));

    // linearity under shared draws
    ScoreField g{1, 1, [&](const Mat& x, const Mat& y, const Vec& t) { return Mat(h(x, y, t).array() - 0.2); }};
    Rng d1 = make_rng(21), d2 = make_rng(21), d3 = make_rng(21);
    const double lf2 = stage2_task_loss(pseudo, f, h, sched, d1).value;
    const double lg2 = stage2_task_loss(pseudo, g, h, sched, d2).value;
    const DsmDraws shared = draw_dsm(pseudo.x, pseudo.y, sched, sched.n_mc, d3);
    const double direct = dsm_point_means(dsm_terms(f, shared), shared, pseudo.size()).mean() -
                          dsm_point_means(dsm_terms(g, shared), shared, pseudo.size()).mean();
    CHECK(lf2 - lg2 == doctest::Approx(direct).epsilon(1e-10));

    PseudoDataset empty;
    empty.x.resize(1, 0);
    empty.y.resize(1, 0);
    CHECK_THROWS(stage2_task_loss(empty, f, h, sched, a));
}

TEST_CASE("loss estimates are deterministic under a seed") {
    Schedule sched;
    const ConditionalTask task = shifted_normal(0.8);
    Rng a = make_rng(22), b = make_rng(22);
    const LossEstimate x = population_error(task, minus_x(), sched, 3000, a);
    const LossEstimate y = population_error(task, minus_x(), sched, 3000, b);
    CHECK(x.value == y.value);
    CHECK(x.std_err == y.std_err);
}

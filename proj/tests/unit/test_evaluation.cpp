#include "semidiff/evaluation.hpp"

#include <doctest.h>

#include <cmath>

using namespace semidiff;

namespace {

// TV(N(0,1), N(1,1)) = 2 Phi(1/2) - 1
constexpr double kTvUnitShift = 0.3829249225480262;

ConditionalTask line_task(double a = 2.0, double b = -1.0, double var = 0.16) {
    return ConditionalTask::gaussian({Mat::Constant(1, 1, a), Vec::Constant(1, b)}, Mat::Constant(1, 1, var));
}

ParetoPoint point(double a, double b, double se) {
    ParetoPoint p;
    p.tv = Vec(2);
    p.tv << a, b;
    p.tv_se = Vec::Constant(2, se);
    return p;
}

}  // namespace

TEST_CASE("histogram TV of exact samples is small") {
    const ConditionalTask task = line_task();
    const Vec y = Vec::Constant(1, 0.5);
    Rng rng = make_rng(51);
    const Mat x = std::sqrt(0.16) * standard_normal(1, 100000, rng);
    const TvEstimate e = tv_conditional(x, task, y, 100);
    CHECK(e.value <= 0.03);
    CHECK(e.method == "histogram");
    CHECK(e.resolution == 100);
    CHECK(e.n_samples == 100000);

    // samples from the wrong conditional are far
    const TvEstimate far = tv_conditional(Mat(x.array() + 0.4), task, y, 100);
    CHECK(far.value == doctest::Approx(kTvUnitShift).epsilon(0.05));

    CHECK_THROWS(tv_conditional(x.leftCols(100), task, y, 100));
    CHECK_THROWS(tv_conditional(x, task, y, 0));
}

TEST_CASE("two-dimensional histogram TV") {
    Mat a = Mat::Identity(2, 1);
    const ConditionalTask task = ConditionalTask::gaussian({a, Vec::Zero(2)}, 0.25 * Mat::Identity(2, 2));
    Rng rng = make_rng(52);
    const Mat x = 0.5 * standard_normal(2, 100000, rng);
    CHECK(tv_conditional(x, task, Vec::Zero(1), 400).value <= 0.05);
}

TEST_CASE("quadrature TV between densities") {
    auto phi = [](double m) { return [m](double x) { return std::exp(-0.5 * (x - m) * (x - m)) / std::sqrt(2 * M_PI); }; };
    CHECK(tv_between(phi(0), phi(1), -12, 13).value == doctest::Approx(kTvUnitShift).epsilon(1e-8));
    CHECK(tv_between(phi(0), phi(0), -12, 12).value == 0.0);

    const ConditionalTask a = ConditionalTask::gaussian({Mat::Zero(1, 1), Vec::Zero(1)}, Mat::Identity(1, 1));
    const ConditionalTask b = ConditionalTask::gaussian({Mat::Zero(1, 1), Vec::Ones(1)}, Mat::Identity(1, 1));
    const Vec y = Vec::Zero(1);
    const double ab = tv_between(a, y, b, y).value, ba = tv_between(b, y, a, y).value;
    CHECK(ab == doctest::Approx(kTvUnitShift).epsilon(0.02));
    CHECK(std::abs(ab - ba) < 1e-12);
    CHECK(tv_between(a, y, a, y).value == 0.0);
}

TEST_CASE("expected TV of the oracle and of shifted scores") {
    const ConditionalTask task = line_task();
    SamplerConfig sc;
    sc.n_steps = 200;
    const ScoreField oracle = task.oracle_field();
    Rng r0 = make_rng(53);
    const TvEstimate e = tv_expected(oracle, task, 4, 10000, 100, sc, r0);
    CHECK(e.value <= 0.05);
    CHECK(e.n_samples == 40000);

    double prev = -1.0;
    for (double c : {0.0, 0.5, 1.0, 2.0}) {
        ScoreField shifted{1, 1, [&, c](const Mat& x, const Mat& y, const Vec& t) { return Mat(oracle(x, y, t).array() + c); }};
        Rng rng = make_rng(54);
        const double v = tv_expected(shifted, task, 4, 10000, 100, sc, rng).value;
        INFO("c = " << c);
        CHECK(v > prev);
        prev = v;
    }

    Rng rng = make_rng(55);
    CHECK_THROWS(tv_expected(oracle, task, 0, 10000, 100, sc, rng));
}

TEST_CASE("dominance") {
    const Vec m = Vec::Zero(2);
    Vec a(2), b(2);
    a << 0.1, 0.2;
    b << 0.2, 0.3;
    CHECK(dominates(a, b, m));
    CHECK_FALSE(dominates(b, a, m));
    CHECK_FALSE(dominates(a, a, m));
    CHECK_FALSE(dominates(a, b, Vec::Constant(2, 0.1)));

    std::vector<ParetoPoint> pts{point(0.1, 0.5, 0.01), point(0.5, 0.1, 0.01), point(0.3, 0.3, 0.01),
                                 point(0.4, 0.6, 0.01), point(0.11, 0.51, 0.01)};
    flag_dominated(pts);
    CHECK_FALSE(pts[0].dominated);
    CHECK_FALSE(pts[1].dominated);
    CHECK_FALSE(pts[2].dominated);
    CHECK(pts[3].dominated);
    // within the noise margin of point 0
    CHECK_FALSE(pts[4].dominated);
}

TEST_CASE("complexity sweep rows") {
    PipelineConfig cfg;
    cfg.tasks = {line_task(2.0, -1.0), line_task(-2.0, 1.0)};
    cfg.specialist.widths = {4};
    cfg.generalist.family = ModelFamily::generalist;
    cfg.generalist.widths = {16, 16};
    cfg.scalarization = Scalarization::linear(Vec::Constant(2, 0.5));
    cfg.specialist_opt.steps = 50;
    cfg.generalist_opt.steps = 50;
    cfg.pseudo_sampler.n_steps = 20;
    cfg.eval.n_conditions = 1;
    cfg.eval.samples_per_condition = 10000;
    cfg.eval.sampler.n_steps = 20;
    cfg.eval.lp_draws = 500;

    const auto rows = complexity_sweep(cfg, {16, 32}, {64, 128}, {1}, true);
    CHECK(rows.size() == 6);
    int labeled = 0;
    for (const auto& r : rows) {
        labeled += r.method == "labeled";
        CHECK(r.report.per_task.size() == 2);
        CHECK(r.runtime_s >= 0.0);
    }
    CHECK(labeled == 2);
    CHECK_THROWS(complexity_sweep(cfg, {100}, {64}, {1}, false));
    CHECK_THROWS(complexity_sweep(cfg, {}, {64}, {1}, false));
}

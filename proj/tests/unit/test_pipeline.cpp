#include "semidiff/losses.hpp"
#include "semidiff/pipeline.hpp"

#include <doctest.h>

#include <cmath>

using namespace semidiff;

namespace {

ConditionalTask line_task(double a = 2.0, double b = -1.0, double var = 0.16) {
    return ConditionalTask::gaussian({Mat::Constant(1, 1, a), Vec::Constant(1, b)}, Mat::Constant(1, 1, var));
}

ModelClassSpec small_spec(ModelFamily family, std::vector<int> widths, double caps = 8.0) {
    ModelClassSpec s;
    s.family = family;
    s.widths = std::move(widths);
    s.caps = {caps, caps};
    return s;
}

PipelineConfig tiny_config() {
    PipelineConfig cfg;
    cfg.tasks = {line_task(2.0, -1.0), line_task(-2.0, 1.0)};
    cfg.specialist = small_spec(ModelFamily::specialist, {4});
    cfg.generalist = small_spec(ModelFamily::generalist, {16, 16});
    cfg.scalarization = Scalarization::linear(Vec::Constant(2, 0.5));
    cfg.specialist_opt.steps = 100;
    cfg.generalist_opt.steps = 100;
    cfg.n_labeled = 64;
    cfg.n_pseudo = 128;
    cfg.pseudo_sampler.n_steps = 50;
    cfg.eval.n_conditions = 2;
    cfg.eval.samples_per_condition = 10000;
    cfg.eval.sampler.n_steps = 50;
    cfg.eval.lp_draws = 2000;
    cfg.seed = 5;
    return cfg;
}

}  // namespace

TEST_CASE("zero optimizer steps return the initialization") {
    const ConditionalTask task = line_task();
    Rng rng = make_rng(41);
    auto [x, y] = task.sample_pairs(100, rng);
    const ModelClassSpec spec = small_spec(ModelFamily::specialist, {4});
    OptimizerConfig opt;
    opt.steps = 0;
    const TrainResult r = train_specialist({0, x, y}, spec, opt, Schedule{});
    CHECK(r.model.params() == ScoreModel::initialize(spec).params());
    CHECK(r.trace.best_step == 0);
    CHECK(r.trace.step.size() == 1);
}

TEST_CASE("holdout split") {
    Mat x = Mat::Random(1, 50), y = Mat::Random(1, 50);
    const ObjectiveData o = split_holdout(x, y, 0.1, 3);
    CHECK(o.holdout_x.cols() == 5);
    CHECK(o.x.cols() == 45);
    const ObjectiveData same = split_holdout(x, y, 0.1, 3);
    CHECK(same.holdout_x == o.holdout_x);
    const ObjectiveData tiny = split_holdout(x.leftCols(3), y.leftCols(3), 0.1, 3);
    CHECK(tiny.holdout_x.cols() == 3);
}

TEST_CASE("pseudo-labelling bookkeeping") {
    const ModelClassSpec spec = small_spec(ModelFamily::specialist, {4});
    const ScoreModel m = ScoreModel::initialize(spec);
    SamplerConfig cfg;
    cfg.n_steps = 20;
    cfg.truncation = Truncation{};
    Rng rng = make_rng(42);

    ConditionPool empty{0, Mat(1, 0)};
    const PseudoDataset e = generate_pseudo(m, empty, cfg, rng);
    CHECK(e.size() == 0);
    CHECK(e.provenance.attempts == 0);

    ConditionPool pool{1, Mat::Constant(1, 300, 0.5)};
    const PseudoDataset p = generate_pseudo(m, pool, cfg, rng, "spec");
    CHECK(p.size() == 300);
    CHECK(p.task == 1);
    CHECK(p.y == pool.y);
    CHECK(p.provenance.specialist_id == "spec");
    CHECK(p.provenance.accepted + p.provenance.clipped == 300);
    int redraws = 0;
    for (int r : p.retries) redraws += r;
    CHECK(p.provenance.attempts == 300 + static_cast<std::size_t>(redraws));
    CHECK(p.provenance.acceptance_rate() ==
          doctest::Approx(static_cast<double>(p.provenance.accepted) / static_cast<double>(p.provenance.attempts)));
    CHECK(p.x.cwiseAbs().maxCoeff() <= cfg.truncation->radius);
    CHECK(p.head(10).size() == 10);

    SamplerConfig no_trunc;
    CHECK_THROWS(generate_pseudo(m, pool, no_trunc, rng));
}

TEST_CASE("warm-started single-task stage 2 starts at zero") {
    const ConditionalTask task = line_task();
    Rng rng = make_rng(43);
    auto [x, y] = task.sample_pairs(200, rng);
    const ModelClassSpec spec = small_spec(ModelFamily::specialist, {4});
    OptimizerConfig opt;
    opt.steps = 50;
    const ScoreModel spec_model = train_specialist({0, x, y}, spec, opt, Schedule{}).model;

    PseudoDataset pseudo;
    std::tie(pseudo.x, pseudo.y) = task.sample_pairs(200, rng);
    ModelClassSpec gspec = spec;
    gspec.family = ModelFamily::generalist;
    const TrainResult g = train_generalist({pseudo}, {spec_model}, gspec, Scalarization::linear(Vec::Ones(1)), opt,
                                           Schedule{}, nullptr, spec_model.params());
    REQUIRE_FALSE(g.trace.holdout.empty());
    CHECK(g.trace.holdout.front() == 0.0);
    CHECK(g.trace.train_objective.front() == 0.0);
}

TEST_CASE("regime and config validation") {
    PipelineConfig cfg = tiny_config();
    cfg.n_pseudo = 10;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.allow_regime_violation = true;
    std::vector<std::string> w;
    CHECK_NOTHROW(w = cfg.validate());
    CHECK_FALSE(w.empty());

    cfg = tiny_config();
    cfg.scalarization = Scalarization::linear(Vec::Ones(1));
    CHECK_THROWS(cfg.validate());

    cfg = tiny_config();
    std::swap(cfg.specialist, cfg.generalist);
    CHECK_THROWS(cfg.validate());

    cfg = tiny_config();
    cfg.generalist.caps = {1.0, 1.0};
    w = cfg.validate();
    bool flagged = false;
    for (const auto& s : w) flagged = flagged || s.find("not realizable") != std::string::npos;
    CHECK(flagged);

    CHECK(tiny_config().resolved_pseudo_sampler().truncation->radius == 4.0);
    cfg = tiny_config();
    cfg.pseudo_sampler.truncation = Truncation{0.0};
    CHECK(cfg.resolved_pseudo_sampler().truncation->radius == doctest::Approx(default_truncation_radius(128, 2)));
}

TEST_CASE("pipeline runs are deterministic under a seed") {
    const PipelineConfig cfg = tiny_config();
    const PipelineResult a = run_pipeline(cfg);
    const PipelineResult b = run_pipeline(cfg);
    REQUIRE(a.generalist);
    REQUIRE(b.generalist);
    CHECK(a.generalist->params() == b.generalist->params());
    CHECK(a.baseline->params() == b.baseline->params());
    CHECK(a.pseudo[1].x == b.pseudo[1].x);
    CHECK(a.generalist_report.scalarized_tv == b.generalist_report.scalarized_tv);
    CHECK(a.specialists.size() == 2);
    CHECK(a.generalist->capacity() > 8 * a.specialists[0].capacity());

    PipelineConfig other = cfg;
    other.seed = 6;
    CHECK(run_pipeline(other).pseudo[0].x != a.pseudo[0].x);
}

TEST_CASE("specialist reaches small population error with ample data") {
    const ConditionalTask task = line_task();
    Rng rng = make_rng(44);
    auto [x, y] = task.sample_pairs(2000, rng);
    OptimizerConfig opt;
    opt.steps = 6000;
    opt.lr = 0.01;
    opt.batch_size = 128;
    const ScoreModel m = train_specialist({0, x, y}, small_spec(ModelFamily::specialist, {8}), opt, Schedule{}).model;
    Rng er = make_rng(45);
    const LossEstimate lp = population_error(task, m.field(), Schedule{}, 20000, er);
    CHECK(lp.value <= 1e-2);
}

TEST_CASE("the model class contains the true score") {
    const ConditionalTask task = line_task();
    const auto [m0, m1] = task.score_growth();
    ModelClassSpec spec = small_spec(ModelFamily::specialist, {8});
    CHECK(spec.caps.m0 >= m0);
    CHECK(spec.caps.m1 >= m1);
    OptimizerConfig opt;
    opt.steps = 20000;
    opt.lr = 0.01;
    const TrainResult fit = fit_oracle(task, spec, opt, Schedule{});
    Rng er = make_rng(46);
    const LossEstimate lp = population_error(task, fit.model.field(), Schedule{}, 20000, er);
    CHECK(lp.value < 1e-3);

    // pseudo-labels drawn from the fitted score carry the conditional moments
    SamplerConfig sc;
    sc.n_steps = 500;
    sc.truncation = Truncation{};
    Rng pr = make_rng(47);
    const PseudoDataset p = generate_pseudo(fit.model, {0, Mat::Constant(1, 20000, 0.75)}, sc, pr);
    const double mean = p.x.mean();
    const double var = (p.x.array() - mean).square().sum() / (p.size() - 1);
    CHECK(std::abs(mean - 0.5) < 0.03);
    CHECK(var == doctest::Approx(0.16).epsilon(0.1));
}

#include "semidiff/pipeline.hpp"

#include "semidiff/evaluation.hpp"
#include "semidiff/losses.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <sstream>

namespace semidiff {

namespace {

// Stream ids for seed derivation.
enum Stream : std::uint64_t {
    kLabeled = 1,
    kPool = 2,
    kPseudo = 3,
    kSpecialistOpt = 4,
    kGeneralistOpt = 5,
    kBaselineOpt = 6,
    kEval = 7,
    kInit = 9,
};

ScoreField borrow(const ScoreModel& m) {
    return ScoreField{m.spec().d_x, m.spec().d_y,
                      [&m](const Mat& x, const Mat& y, const Vec& t) { return m.eval(x, y, t); }};
}

Mat gather(const Mat& src, const std::vector<Eigen::Index>& idx) {
    Mat out(src.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = src.col(idx[j]);
    return out;
}

Scalarization exact(Scalarization s) {
    s.smoothing_temp = 0.0;
    return s;
}

template <class F>
auto run_indexed(std::size_t n, int workers, F&& fn) {
    using R = decltype(fn(std::size_t{0}));
    std::vector<R> out;
    out.reserve(n);
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) out.push_back(fn(i));
        return out;
    }
    std::vector<std::future<R>> futs;
    for (std::size_t i = 0; i < n; ++i) futs.push_back(std::async(std::launch::async, fn, i));
    for (auto& f : futs) out.push_back(f.get());
    return out;
}

}  // namespace

ObjectiveData split_holdout(const Mat& x, const Mat& y, double frac, std::uint64_t seed) {
    const Eigen::Index n = x.cols();
    const auto n_hold = static_cast<Eigen::Index>(std::llround(frac * static_cast<double>(n)));
    ObjectiveData obj;
    if (n_hold <= 0 || n_hold >= n) {
        obj.x = obj.holdout_x = x;
        obj.y = obj.holdout_y = y;
        return obj;
    }
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng = make_rng(seed, {0x5117});
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::vector<Eigen::Index> hold(idx.begin(), idx.begin() + n_hold);
    std::vector<Eigen::Index> train(idx.begin() + n_hold, idx.end());
    std::sort(train.begin(), train.end());
    obj.x = gather(x, train);
    obj.y = gather(y, train);
    obj.holdout_x = gather(x, hold);
    obj.holdout_y = gather(y, hold);
    return obj;
}

TrainResult train_scalarized(const std::vector<ObjectiveData>& objectives, const ModelClassSpec& spec,
                             const Scalarization& s, const OptimizerConfig& opt, const Schedule& sched,
                             const std::optional<Vec>& init_params) {
    spec.validate();
    opt.validate();
    sched.validate();
    s.validate();
    const auto K = objectives.size();
    if (K == 0) throw std::invalid_argument("train: no objectives");
    if (s.kind == Scalarization::Kind::linear && s.weights.size() != static_cast<Eigen::Index>(K))
        throw std::invalid_argument("train: scalarization dimension does not match number of objectives");
    for (const auto& o : objectives) {
        if (o.x.cols() == 0 || o.holdout_x.cols() == 0) throw std::invalid_argument("train: empty objective data");
        if (o.x.rows() != spec.d_x || o.y.rows() != spec.d_y)
            throw std::invalid_argument("train: data dimensions do not match the model spec");
    }

    ScoreModel model = init_params ? ScoreModel(spec, *init_params) : ScoreModel::initialize(spec);
    Vec params = model.params();
    const Scalarization s_exact = exact(s);

    std::vector<DsmDraws> hold(K);
    std::vector<Vec> hold_ref(K);
    for (std::size_t k = 0; k < K; ++k) {
        Rng hr = make_rng(opt.seed, {0x401d, k});
        hold[k] = draw_dsm(objectives[k].holdout_x, objectives[k].holdout_y, sched, opt.holdout_mc, hr);
        if (objectives[k].reference) hold_ref[k] = dsm_terms(*objectives[k].reference, hold[k]);
    }
    // Per-draw held-out terms for each objective, reference-subtracted.
    auto holdout_terms = [&](const ScoreModel& m) {
        std::vector<Vec> terms(K);
        const ScoreField f = borrow(m);
        for (std::size_t k = 0; k < K; ++k) {
            terms[k] = dsm_terms(f, hold[k]);
            if (objectives[k].reference) terms[k] -= hold_ref[k];
        }
        return terms;
    };
    auto means = [&](const std::vector<Vec>& terms) {
        Vec u(static_cast<Eigen::Index>(K));
        for (std::size_t k = 0; k < K; ++k) u(static_cast<Eigen::Index>(k)) = terms[k].mean();
        return u;
    };

    TrainResult result{model, {}};
    std::vector<Vec> best_terms = holdout_terms(model);
    Vec u_ema = means(best_terms);
    double best = evaluate(s_exact, u_ema);
    result.trace.step.push_back(0);
    result.trace.train_objective.push_back(best);
    result.trace.holdout.push_back(best);
    result.trace.best_step = 0;
    result.trace.best_holdout = best;
    Vec best_params = params;

    const bool linear = s.kind == Scalarization::Kind::linear;
    Adam adam(params.size(), opt);
    Rng rng = make_rng(opt.seed, {0x7a1});
    double last_objective = best;
    for (int step = 0; step < opt.steps; ++step) {
        Scalarization s_step = s;
        if (s.kind == Scalarization::Kind::chebyshev)
            s_step.smoothing_temp = opt.smooth_chebyshev ? opt.tau_at(step) : 0.0;
        const Vec g = subgradient(s_step, u_ema);

        std::vector<std::size_t> active;
        for (std::size_t k = 0; k < K; ++k)
            if (!linear || g(static_cast<Eigen::Index>(k)) > 0.0) active.push_back(k);
        const bool eval_step = (step + 1) % opt.eval_every == 0 || step + 1 == opt.steps;

        std::vector<DsmDraws> draws(active.size());
        Eigen::Index total = 0;
        for (std::size_t a = 0; a < active.size(); ++a) {
            const auto& o = objectives[active[a]];
            std::uniform_int_distribution<Eigen::Index> pick(0, o.x.cols() - 1);
            std::vector<Eigen::Index> idx(static_cast<std::size_t>(opt.batch_size));
            for (auto& i : idx) i = pick(rng);
            draws[a] = draw_dsm(gather(o.x, idx), gather(o.y, idx), sched, opt.n_mc, rng);
            total += draws[a].size();
        }
        RegressionBatch batch;
        batch.x.resize(spec.d_x, total);
        batch.y.resize(spec.d_y, total);
        batch.t.resize(total);
        batch.target.resize(spec.d_x, total);
        batch.weight.resize(total);
        Eigen::Index off = 0;
        for (std::size_t a = 0; a < active.size(); ++a) {
            const auto& d = draws[a];
            const Eigen::Index n = d.size();
            batch.x.middleCols(off, n) = d.x_t;
            batch.y.middleCols(off, n) = d.y;
            batch.t.segment(off, n) = d.t;
            batch.target.middleCols(off, n) = d.target;
            batch.weight.segment(off, n).setConstant(g(static_cast<Eigen::Index>(active[a])) *
                                                     static_cast<double>(total) / static_cast<double>(n));
            off += n;
        }

        const GradResult gr = model.loss_grad(batch);
        if (!std::isfinite(gr.loss)) {
            std::ostringstream os;
            os << "training diverged at step " << step << " (non-finite loss)";
            throw TrainingDivergence(os.str(), result.trace);
        }
        adam.step(params, gr.grad, opt.lr_at(step));
        if (!params.allFinite()) {
            std::ostringstream os;
            os << "training diverged at step " << step << " (non-finite parameters)";
            throw TrainingDivergence(os.str(), result.trace);
        }

        if (!linear || eval_step) {
            off = 0;
            for (std::size_t a = 0; a < active.size(); ++a) {
                const auto k = active[a];
                const Eigen::Index n = draws[a].size();
                Vec terms = gr.sq_err.segment(off, n);
                if (objectives[k].reference) terms -= dsm_terms(*objectives[k].reference, draws[a]);
                u_ema(static_cast<Eigen::Index>(k)) = 0.9 * u_ema(static_cast<Eigen::Index>(k)) + 0.1 * terms.mean();
                off += n;
            }
            last_objective = evaluate(s_exact, u_ema);
        }
        model = ScoreModel(spec, params);

        if (eval_step) {
            std::vector<Vec> terms = holdout_terms(model);
            const double h = evaluate(s_exact, means(terms));
            result.trace.step.push_back(step + 1);
            result.trace.train_objective.push_back(last_objective);
            result.trace.holdout.push_back(h);
            // The later iterate takes over unless it is worse than the incumbent
            // by more than two standard errors of the paired held-out difference
            // (linearized through S at the incumbent).
            const Vec g = subgradient(s_exact, means(best_terms));
            double var = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                const Vec d = terms[k] - best_terms[k];
                const double n = static_cast<double>(d.size());
                const double vk = n > 1 ? (d.array() - d.mean()).square().sum() / (n - 1) / n : 0.0;
                var += g(static_cast<Eigen::Index>(k)) * g(static_cast<Eigen::Index>(k)) * vk;
            }
            if (h - best <= 2.0 * std::sqrt(var)) {
                best = h;
                best_terms = std::move(terms);
                best_params = params;
                result.trace.best_step = step + 1;
                result.trace.best_holdout = h;
            }
        }
    }
    result.model = ScoreModel(spec, best_params);
    return result;
}

TrainResult train_specialist(const LabeledDataset& data, const ModelClassSpec& spec, const OptimizerConfig& opt,
                             const Schedule& sched) {
    if (spec.family != ModelFamily::specialist)
        throw std::invalid_argument("train_specialist: spec must be a specialist spec");
    data.validate();
    return train_scalarized({split_holdout(data.x, data.y, opt.holdout_frac, opt.seed)}, spec,
                            Scalarization::linear(Vec::Ones(1)), opt, sched);
}

PseudoDataset generate_pseudo(const ScoreModel& specialist, const ConditionPool& pool, const SamplerConfig& cfg,
                              Rng& rng, const std::string& specialist_id) {
    if (!cfg.truncation) throw std::invalid_argument("generate_pseudo: sampler truncation must be configured");
    PseudoDataset out;
    out.task = pool.task;
    out.provenance.specialist_id = specialist_id;
    out.provenance.sampler = cfg;
    if (pool.size() == 0) {
        out.x.resize(specialist.spec().d_x, 0);
        out.y.resize(pool.y.rows(), 0);
        return out;
    }
    TruncatedBatch b = sample_truncated(specialist.field(), pool.y, cfg, rng);
    out.x = std::move(b.x);
    out.y = pool.y;
    out.accepted = std::move(b.accepted);
    out.retries = std::move(b.retries);
    out.provenance.attempts = b.attempts;
    out.provenance.accepted = b.accepted_count;
    out.provenance.clipped = b.clipped;
    return out;
}

TrainResult train_generalist(const std::vector<PseudoDataset>& pseudo, const std::vector<ScoreModel>& specialists,
                             const ModelClassSpec& spec, const Scalarization& s, const OptimizerConfig& opt,
                             const Schedule& sched, const std::vector<LabeledDataset>* extra_labeled,
                             const std::optional<Vec>& init_params) {
    if (pseudo.size() != specialists.size())
        throw std::invalid_argument("train_generalist: need one pseudo dataset per specialist");
    if (extra_labeled && extra_labeled->size() != pseudo.size())
        throw std::invalid_argument("train_generalist: need one labeled dataset per task");
    std::vector<ObjectiveData> objs;
    for (std::size_t k = 0; k < pseudo.size(); ++k) {
        if (pseudo[k].size() == 0) throw std::invalid_argument("train_generalist: empty pseudo dataset");
        Mat x = pseudo[k].x, y = pseudo[k].y;
        if (extra_labeled) {
            const auto& l = (*extra_labeled)[k];
            Mat xx(x.rows(), x.cols() + l.size()), yy(y.rows(), y.cols() + l.size());
            xx << x, l.x;
            yy << y, l.y;
            x = std::move(xx);
            y = std::move(yy);
        }
        ObjectiveData o = split_holdout(x, y, opt.holdout_frac, derive_seed(opt.seed, {k}));
        o.reference = specialists[k].field();
        objs.push_back(std::move(o));
    }
    return train_scalarized(objs, spec, s, opt, sched, init_params);
}

TrainResult fit_oracle(const ConditionalTask& task, const ModelClassSpec& spec, const OptimizerConfig& opt,
                       const Schedule& sched) {
    spec.validate();
    opt.validate();
    sched.validate();
    ScoreModel model = ScoreModel::initialize(spec);
    Vec params = model.params();
    Adam adam(params.size(), opt);
    Rng rng = make_rng(opt.seed, {0x0f17});
    const ScoreField oracle = task.oracle_field();
    TrainResult result{model, {}};
    for (int step = 0; step < opt.steps; ++step) {
        const auto [x0, y] = task.sample_pairs(opt.batch_size, rng);
        const DsmDraws d = draw_dsm(x0, y, sched, opt.n_mc, rng);
        RegressionBatch batch{d.x_t, d.y, d.t, oracle(d.x_t, d.y, d.t), {}};
        const GradResult gr = model.loss_grad(batch);
        if (!std::isfinite(gr.loss)) throw TrainingDivergence("oracle fit diverged", result.trace);
        adam.step(params, gr.grad, opt.lr_at(step));
        model = ScoreModel(spec, params);
        if ((step + 1) % opt.eval_every == 0 || step + 1 == opt.steps) {
            result.trace.step.push_back(step + 1);
            result.trace.train_objective.push_back(gr.loss);
        }
    }
    result.trace.best_step = opt.steps;
    result.model = model;
    return result;
}

TrainResult train_labeled_only(const std::vector<LabeledDataset>& datasets, const ModelClassSpec& spec,
                               const Scalarization& s, const OptimizerConfig& opt, const Schedule& sched) {
    std::vector<ObjectiveData> objs;
    for (std::size_t k = 0; k < datasets.size(); ++k) {
        datasets[k].validate();
        objs.push_back(split_holdout(datasets[k].x, datasets[k].y, opt.holdout_frac, derive_seed(opt.seed, {k})));
    }
    return train_scalarized(objs, spec, s, opt, sched);
}

Vec ModelReport::tv() const {
    Vec v(static_cast<Eigen::Index>(per_task.size()));
    for (std::size_t k = 0; k < per_task.size(); ++k) v(static_cast<Eigen::Index>(k)) = per_task[k].tv;
    return v;
}

Vec ModelReport::lp() const {
    Vec v(static_cast<Eigen::Index>(per_task.size()));
    for (std::size_t k = 0; k < per_task.size(); ++k) v(static_cast<Eigen::Index>(k)) = per_task[k].lp;
    return v;
}

ModelReport evaluate_model(const ScoreField& model, const std::vector<ConditionalTask>& tasks,
                           const Scalarization& s, const EvalConfig& eval, const Schedule& sched,
                           std::uint64_t seed) {
    ModelReport rep;
    for (std::size_t k = 0; k < tasks.size(); ++k) {
        Rng tv_rng = make_rng(seed, {kEval, k, 1});
        Rng lp_rng = make_rng(seed, {kEval, k, 2});
        const TvEstimate tv = tv_expected(model, tasks[k], eval.n_conditions, eval.samples_per_condition, eval.bins,
                                          eval.sampler, tv_rng);
        const LossEstimate lp = population_error(tasks[k], model, sched, eval.lp_draws, lp_rng);
        rep.per_task.push_back({tv.value, tv.std_err, lp.value, lp.std_err});
    }
    const Scalarization se = exact(s);
    rep.scalarized_tv = evaluate(se, rep.tv());
    rep.scalarized_lp = evaluate(se, rep.lp());
    return rep;
}

PipelineError::PipelineError(const std::string& stage, int task, const std::string& what)
    : std::runtime_error("pipeline stage '" + stage + "'" + (task >= 0 ? " task " + std::to_string(task) : "") +
                         ": " + what),
      stage_(stage), task_(task) {}

std::vector<std::string> PipelineConfig::validate() const {
    std::vector<std::string> warnings;
    if (tasks.empty()) throw std::invalid_argument("pipeline: at least one task required");
    const int d_x = tasks.front().d_x(), d_y = tasks.front().d_y();
    for (const auto& t : tasks)
        if (t.d_x() != d_x || t.d_y() != d_y) throw std::invalid_argument("pipeline: tasks must share dimensions");
    for (const auto* spec : {&specialist, &generalist}) {
        spec->validate();
        if (spec->d_x != d_x || spec->d_y != d_y)
            throw std::invalid_argument("pipeline: model spec dimensions do not match the tasks");
    }
    if (specialist.family != ModelFamily::specialist || generalist.family != ModelFamily::generalist)
        throw std::invalid_argument("pipeline: specialist/generalist spec families are swapped");
    schedule.validate();
    resolved_pseudo_sampler().validate();
    eval.sampler.validate();
    specialist_opt.validate();
    generalist_opt.validate();
    scalarization.validate();
    if (scalarization.kind == Scalarization::Kind::linear &&
        scalarization.weights.size() != static_cast<Eigen::Index>(tasks.size()))
        throw std::invalid_argument("pipeline: linear weights must have one entry per task");
    if (n_labeled < 1) throw std::invalid_argument("pipeline: n_labeled must be positive");
    if (n_pseudo < 1) throw std::invalid_argument("pipeline: n_pseudo must be positive");
    if (eval.n_conditions < 1) throw std::invalid_argument("pipeline: eval.n_conditions must be positive");
    if (n_pseudo < n_labeled) {
        const std::string msg = "regime violation: N (" + std::to_string(n_pseudo) + ") < n (" +
                                std::to_string(n_labeled) + "); the semi-supervised regime assumes N >= n";
        if (!allow_regime_violation) throw std::invalid_argument(msg + " (set allow_regime_violation to override)");
        warnings.push_back(msg);
    }
    for (std::size_t k = 0; k < tasks.size(); ++k) {
        const auto [m0, m1] = tasks[k].score_growth();
        for (const auto* spec : {&specialist, &generalist})
            if (spec->caps.m0 < m0 || spec->caps.m1 < m1)
                warnings.push_back("task " + std::to_string(k) + ": " + to_string(spec->family) + " growth caps (" +
                                   std::to_string(spec->caps.m0) + ", " + std::to_string(spec->caps.m1) +
                                   ") are below the true score's (" + std::to_string(m0) + ", " + std::to_string(m1) +
                                   "); the task is not realizable");
    }
    if (capacity_report(specialist) >= capacity_report(generalist))
        warnings.push_back("specialist capacity is not below generalist capacity");
    return warnings;
}

SamplerConfig PipelineConfig::resolved_pseudo_sampler() const {
    SamplerConfig c = pseudo_sampler;
    if (!c.truncation) c.truncation = Truncation{};
    if (c.truncation->radius <= 0.0) c.truncation->radius = default_truncation_radius(n_pseudo, tasks.size());
    return c;
}

std::vector<LabeledDataset> draw_labeled(const PipelineConfig& cfg, std::size_t n) {
    std::vector<LabeledDataset> out;
    for (std::size_t k = 0; k < cfg.tasks.size(); ++k) {
        Rng rng = make_rng(cfg.seed, {kLabeled, k});
        auto [x, y] = cfg.tasks[k].sample_pairs(static_cast<Eigen::Index>(n), rng);
        out.push_back({static_cast<int>(k), std::move(x), std::move(y)});
    }
    return out;
}

std::vector<ConditionPool> draw_pools(const PipelineConfig& cfg, std::size_t n_pool) {
    std::vector<ConditionPool> out;
    for (std::size_t k = 0; k < cfg.tasks.size(); ++k) {
        Rng rng = make_rng(cfg.seed, {kPool, k});
        out.push_back({static_cast<int>(k), cfg.tasks[k].sample_conditions(static_cast<Eigen::Index>(n_pool), rng)});
    }
    return out;
}

std::vector<TrainResult> train_specialists(const PipelineConfig& cfg, const std::vector<LabeledDataset>& labeled) {
    return run_indexed(labeled.size(), cfg.workers, [&](std::size_t k) {
        ModelClassSpec spec = cfg.specialist;
        spec.init_seed = derive_seed(cfg.seed, {kInit, k, cfg.specialist.init_seed});
        OptimizerConfig opt = cfg.specialist_opt;
        opt.seed = derive_seed(cfg.seed, {kSpecialistOpt, k, cfg.specialist_opt.seed});
        try {
            return train_specialist(labeled[k], spec, opt, cfg.schedule);
        } catch (const std::exception& e) {
            throw PipelineError("stage1", static_cast<int>(k), e.what());
        }
    });
}

std::vector<PseudoDataset> generate_all_pseudo(const PipelineConfig& cfg, const std::vector<ScoreModel>& specialists,
                                               const std::vector<ConditionPool>& pools) {
    const SamplerConfig sampler = cfg.resolved_pseudo_sampler();
    return run_indexed(pools.size(), cfg.workers, [&](std::size_t k) {
        Rng rng = make_rng(cfg.seed, {kPseudo, k});
        try {
            return generate_pseudo(specialists[k], pools[k], sampler, rng, "specialist_" + std::to_string(k));
        } catch (const std::exception& e) {
            throw PipelineError("pseudo", static_cast<int>(k), e.what());
        }
    });
}

ModelClassSpec seeded_generalist_spec(const PipelineConfig& cfg) {
    ModelClassSpec spec = cfg.generalist;
    spec.init_seed = derive_seed(cfg.seed, {kInit, 100, cfg.generalist.init_seed});
    return spec;
}

OptimizerConfig seeded_generalist_opt(const PipelineConfig& cfg) {
    OptimizerConfig opt = cfg.generalist_opt;
    opt.seed = derive_seed(cfg.seed, {kGeneralistOpt, cfg.generalist_opt.seed});
    return opt;
}

OptimizerConfig seeded_baseline_opt(const PipelineConfig& cfg) {
    OptimizerConfig opt = cfg.generalist_opt;
    opt.seed = derive_seed(cfg.seed, {kBaselineOpt, cfg.generalist_opt.seed});
    return opt;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
    PipelineResult res;
    res.seed = cfg.seed;
    res.warnings = cfg.validate();

    res.labeled = draw_labeled(cfg, cfg.n_labeled);
    for (auto& t : train_specialists(cfg, res.labeled)) {
        res.specialists.push_back(std::move(t.model));
        res.specialist_traces.push_back(std::move(t.trace));
    }
    res.pseudo = generate_all_pseudo(cfg, res.specialists, draw_pools(cfg, cfg.n_pseudo));
    for (const auto& p : res.pseudo)
        if (p.provenance.clipped > 0)
            res.warnings.push_back("task " + std::to_string(p.task) + ": " + std::to_string(p.provenance.clipped) +
                                   " pseudo-samples clipped into B_R after retry exhaustion");

    const ModelClassSpec gspec = seeded_generalist_spec(cfg);
    std::optional<Vec> init;
    if (cfg.warm_start) {
        if (capacity_report(gspec) != res.specialists.front().capacity() || gspec.widths != cfg.specialist.widths)
            throw PipelineError("stage2", -1, "warm start requires the generalist architecture to match the specialist");
        init = res.specialists.front().params();
    }
    try {
        auto g = train_generalist(res.pseudo, res.specialists, gspec, cfg.scalarization, seeded_generalist_opt(cfg),
                                  cfg.schedule,
                                  cfg.include_labeled_in_stage2 ? &res.labeled : nullptr, init);
        res.generalist = std::move(g.model);
        res.generalist_trace = std::move(g.trace);
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError("stage2", -1, e.what());
    }

    if (cfg.run_baseline) {
        try {
            auto b = train_labeled_only(res.labeled, gspec, cfg.scalarization, seeded_baseline_opt(cfg), cfg.schedule);
            res.baseline = std::move(b.model);
            res.baseline_trace = std::move(b.trace);
        } catch (const std::exception& e) {
            throw PipelineError("baseline", -1, e.what());
        }
    }

    try {
        res.generalist_report =
            evaluate_model(res.generalist->field(), cfg.tasks, cfg.scalarization, cfg.eval, cfg.schedule, cfg.seed);
        if (res.baseline)
            res.baseline_report =
                evaluate_model(res.baseline->field(), cfg.tasks, cfg.scalarization, cfg.eval, cfg.schedule, cfg.seed);
        if (cfg.evaluate_specialists) {
            ModelReport rep;
            for (std::size_t k = 0; k < cfg.tasks.size(); ++k) {
                const ModelReport one = evaluate_model(res.specialists[k].field(), {cfg.tasks[k]},
                                                       Scalarization::linear(Vec::Ones(1)), cfg.eval, cfg.schedule,
                                                       derive_seed(cfg.seed, {kEval, k}));
                rep.per_task.push_back(one.per_task.front());
            }
            const Scalarization se = exact(cfg.scalarization);
            rep.scalarized_tv = evaluate(se, rep.tv());
            rep.scalarized_lp = evaluate(se, rep.lp());
            res.specialist_report = rep;
        }
    } catch (const std::exception& e) {
        throw PipelineError("evaluation", -1, e.what());
    }
    return res;
}

}  // namespace semidiff

#include "semidiff/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace semidiff {

using nlohmann::json;

namespace {

// Typed reader over one JSON object that remembers which keys were consulted,
// so leftovers can be reported as unknown.
class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    template <class T>
    T get(const std::string& key, T def) {
        seen_.insert(key);
        if (!j_.contains(key) || j_.at(key).is_null()) return def;
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(path_ + "." + key + ": " + e.what());
        }
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    const json& at(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string path(const std::string& key) const { return path_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(path_ + "." + it.key() + ": unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

Vec vec_from(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path + ": expected an array of numbers");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(path + ": expected numbers");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

Mat mat_from(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path + ": expected a non-empty array of rows");
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        const Vec row = vec_from(j[r], path);
        if (static_cast<std::size_t>(row.size()) != cols) throw ConfigError(path + ": ragged matrix");
        m.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return m;
}

json vec_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json mat_json(const Mat& m) {
    json a = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vec_json(m.row(r).transpose()));
    return a;
}

template <class F>
auto wrap(const std::string& path, F&& fn) {
    try {
        return fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

ModelClassSpec spec_from(const json& j, const std::string& path, ModelFamily family, std::vector<int> widths) {
    Obj o(j, path);
    ModelClassSpec s;
    s.family = family;
    s.widths = o.get("widths", widths);
    s.caps.m0 = o.get("m0", s.caps.m0);
    s.caps.m1 = o.get("m1", s.caps.m1);
    s.init_seed = o.get<std::uint64_t>("init_seed", 0);
    s.init_scale = o.get("init_scale", s.init_scale);
    o.finish();
    return s;
}

Schedule schedule_from(const json& j, const std::string& path) {
    Obj o(j, path);
    Schedule s;
    s.t0 = o.get("t0", s.t0);
    s.t_max = o.get("t_max", s.t_max);
    s.n_mc = o.get("n_mc", s.n_mc);
    o.finish();
    return s;
}

SamplerConfig sampler_from(const json& j, const std::string& path, SamplerConfig s) {
    Obj o(j, path);
    s.n_steps = o.get("n_steps", s.n_steps);
    s.t_max = o.get("t_max", s.t_max);
    s.t0 = o.get("t0", s.t0);
    const std::string kind = o.get<std::string>("kind", s.kind == SamplerKind::sde ? "sde" : "ode");
    if (kind == "sde") s.kind = SamplerKind::sde;
    else if (kind == "ode") s.kind = SamplerKind::ode;
    else throw ConfigError(o.path("kind") + ": expected 'sde' or 'ode'");
    if (o.has("truncation")) {
        Obj t(o.at("truncation"), o.path("truncation"));
        Truncation tr = s.truncation.value_or(Truncation{});
        tr.radius = t.get("radius", tr.radius);
        tr.max_retries = t.get("max_retries", tr.max_retries);
        const std::string ov = t.get<std::string>("overflow", tr.overflow == OverflowPolicy::clip ? "clip" : "fail");
        if (ov == "clip") tr.overflow = OverflowPolicy::clip;
        else if (ov == "fail") tr.overflow = OverflowPolicy::fail;
        else throw ConfigError(t.path("overflow") + ": expected 'clip' or 'fail'");
        t.finish();
        s.truncation = tr;
    } else if (j.contains("truncation")) {
        s.truncation.reset();
    }
    o.finish();
    return s;
}

OptimizerConfig optimizer_from(const json& j, const std::string& path) {
    Obj o(j, path);
    OptimizerConfig c;
    c.algorithm = o.get("algorithm", c.algorithm);
    c.lr = o.get("lr", c.lr);
    c.lr_final_frac = o.get("lr_final_frac", c.lr_final_frac);
    c.steps = o.get("steps", c.steps);
    c.batch_size = o.get("batch_size", c.batch_size);
    c.n_mc = o.get("n_mc", c.n_mc);
    c.eval_every = o.get("eval_every", c.eval_every);
    c.holdout_frac = o.get("holdout_frac", c.holdout_frac);
    c.holdout_mc = o.get("holdout_mc", c.holdout_mc);
    c.tau_start = o.get("tau_start", c.tau_start);
    c.tau_end = o.get("tau_end", c.tau_end);
    c.smooth_chebyshev = o.get("smooth_chebyshev", c.smooth_chebyshev);
    c.beta1 = o.get("beta1", c.beta1);
    c.beta2 = o.get("beta2", c.beta2);
    c.eps = o.get("eps", c.eps);
    c.seed = o.get<std::uint64_t>("seed", c.seed);
    o.finish();
    return c;
}

ConditionalTask task_from(const json& j, const std::string& path) {
    Obj o(j, path);
    const std::string name = o.get<std::string>("name", "");
    const int d_x = o.get("d_x", 1);
    const int d_y = o.get("d_y", 1);
    if (!o.has("components")) throw ConfigError(path + ".components: required");
    const json& comps = o.at("components");
    if (!comps.is_array() || comps.empty()) throw ConfigError(path + ".components: expected a non-empty array");
    std::vector<GaussianComponent> cs;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const std::string cp = path + ".components[" + std::to_string(i) + "]";
        Obj c(comps[i], cp);
        GaussianComponent g;
        g.weight = c.get("weight", 1.0);
        g.mean.A = c.has("A") ? mat_from(c.at("A"), cp + ".A") : Mat::Zero(d_x, d_y);
        g.mean.b = c.has("b") ? vec_from(c.at("b"), cp + ".b") : Vec::Zero(d_x);
        g.cov = c.has("cov") ? mat_from(c.at("cov"), cp + ".cov") : Mat::Identity(d_x, d_x);
        c.finish();
        cs.push_back(std::move(g));
    }
    ConditionMarginal m;
    if (o.has("marginal")) {
        Obj mo(o.at("marginal"), o.path("marginal"));
        const std::string kind = mo.get<std::string>("kind", "uniform");
        if (kind == "uniform") m.kind = ConditionMarginal::Kind::uniform;
        else if (kind == "truncated_gaussian") m.kind = ConditionMarginal::Kind::truncated_gaussian;
        else throw ConfigError(mo.path("kind") + ": expected 'uniform' or 'truncated_gaussian'");
        if (mo.has("mean")) m.mean = vec_from(mo.at("mean"), mo.path("mean"));
        if (mo.has("std")) m.std = vec_from(mo.at("std"), mo.path("std"));
        mo.finish();
    }
    o.finish();
    return wrap(path, [&] { return ConditionalTask(d_x, d_y, cs, m, name); });
}

json task_json(const ConditionalTask& t) {
    json comps = json::array();
    for (const auto& c : t.components())
        comps.push_back({{"weight", c.weight}, {"A", mat_json(c.mean.A)}, {"b", vec_json(c.mean.b)},
                         {"cov", mat_json(c.cov)}});
    json m = {{"kind", t.marginal().kind == ConditionMarginal::Kind::uniform ? "uniform" : "truncated_gaussian"}};
    if (t.marginal().mean.size()) m["mean"] = vec_json(t.marginal().mean);
    if (t.marginal().std.size()) m["std"] = vec_json(t.marginal().std);
    return {{"name", t.name()}, {"d_x", t.d_x()}, {"d_y", t.d_y()}, {"components", comps}, {"marginal", m}};
}

EnvSpec env_from(const json& j, const std::string& path) {
    Obj o(j, path);
    EnvSpec e;
    e.kind = o.get("kind", e.kind);
    e.goal = o.get("goal", e.goal);
    e.gamma = o.get("gamma", e.gamma);
    e.init_lo = o.get("init_lo", e.init_lo);
    e.init_hi = o.get("init_hi", e.init_hi);
    e.noise_std = o.get("noise_std", e.noise_std);
    e.gain = o.get("gain", e.gain);
    e.action_std = o.get("action_std", e.action_std);
    e.expert_shift = o.get("expert_shift", e.expert_shift);
    e.reward_scale = o.get("reward_scale", e.reward_scale);
    o.finish();
    wrap(path, [&] { e.validate(); return 0; });
    return e;
}

json env_json(const EnvSpec& e) {
    return {{"kind", e.kind},           {"goal", e.goal},       {"gamma", e.gamma},
            {"init_lo", e.init_lo},     {"init_hi", e.init_hi}, {"noise_std", e.noise_std},
            {"gain", e.gain},           {"action_std", e.action_std},
            {"expert_shift", e.expert_shift}, {"reward_scale", e.reward_scale}};
}

json optimizer_json(const OptimizerConfig& c) {
    return {{"algorithm", c.algorithm},
            {"lr", c.lr},
            {"lr_final_frac", c.lr_final_frac},
            {"steps", c.steps},
            {"batch_size", c.batch_size},
            {"n_mc", c.n_mc},
            {"eval_every", c.eval_every},
            {"holdout_frac", c.holdout_frac},
            {"holdout_mc", c.holdout_mc},
            {"tau_start", c.tau_start},
            {"tau_end", c.tau_end},
            {"smooth_chebyshev", c.smooth_chebyshev},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"eps", c.eps},
            {"seed", c.seed}};
}

}  // namespace

std::string to_string(Mode m) {
    switch (m) {
        case Mode::distribution: return "distribution";
        case Mode::mdp: return "mdp";
        case Mode::sweep: return "sweep";
        case Mode::pareto: return "pareto";
        case Mode::axioms: return "axioms";
    }
    return "?";
}

Mode mode_from_string(const std::string& s) {
    for (Mode m : {Mode::distribution, Mode::mdp, Mode::sweep, Mode::pareto, Mode::axioms})
        if (to_string(m) == s) return m;
    throw ConfigError("mode: unknown mode '" + s + "' (expected distribution, mdp, sweep, pareto or axioms)");
}

json to_json(const Scalarization& s) {
    switch (s.kind) {
        case Scalarization::Kind::linear: return {{"kind", "linear"}, {"weights", vec_json(s.weights)}};
        case Scalarization::Kind::chebyshev: return {{"kind", "chebyshev"}, {"smoothing_temp", s.smoothing_temp}};
        case Scalarization::Kind::lp:
            return {{"kind", "lp"}, {"p", std::isinf(s.p) ? json("inf") : json(s.p)}};
    }
    return {};
}

Scalarization scalarization_from_json(const json& j, const std::string& path) {
    Obj o(j, path);
    const std::string kind = o.get<std::string>("kind", "linear");
    Scalarization s;
    if (kind == "linear") {
        if (!o.has("weights")) throw ConfigError(path + ".weights: required for linear");
        s = wrap(path, [&] { return Scalarization::linear(vec_from(o.at("weights"), o.path("weights"))); });
    } else if (kind == "chebyshev") {
        s = wrap(path, [&] { return Scalarization::chebyshev(o.get("smoothing_temp", 0.0)); });
    } else if (kind == "lp") {
        double p = 2.0;
        if (o.has("p")) {
            const json& pj = o.at("p");
            if (pj.is_string() && pj.get<std::string>() == "inf") p = std::numeric_limits<double>::infinity();
            else if (pj.is_number()) p = pj.get<double>();
            else throw ConfigError(o.path("p") + ": expected a number or \"inf\"");
        }
        s = wrap(path, [&] { return Scalarization::lp(p); });
    } else {
        throw ConfigError(o.path("kind") + ": expected linear, chebyshev or lp");
    }
    o.finish();
    return s;
}

json to_json(const SamplerConfig& s) {
    json j = {{"n_steps", s.n_steps}, {"t_max", s.t_max}, {"t0", s.t0},
              {"kind", s.kind == SamplerKind::sde ? "sde" : "ode"}};
    if (s.truncation)
        j["truncation"] = {{"radius", s.truncation->radius},
                           {"max_retries", s.truncation->max_retries},
                           {"overflow", s.truncation->overflow == OverflowPolicy::clip ? "clip" : "fail"}};
    else
        j["truncation"] = nullptr;
    return j;
}

json to_json(const ModelClassSpec& s) {
    return {{"widths", s.widths}, {"m0", s.caps.m0}, {"m1", s.caps.m1}, {"init_seed", s.init_seed},
            {"init_scale", s.init_scale}};
}

ExperimentConfig parse_config(const json& doc) {
    Obj o(doc, "config");
    ExperimentConfig c;
    c.mode = mode_from_string(o.get<std::string>("mode", "distribution"));
    c.name = o.get("name", c.name);
    c.seeds = o.get("seeds", c.seeds);
    c.output_dir = o.get("output_dir", c.output_dir);
    const int workers = o.get("workers", 1);
    c.save_checkpoints = o.get("save_checkpoints", c.save_checkpoints);
    c.save_pseudo = o.get("save_pseudo", c.save_pseudo);

    PipelineConfig& p = c.pipeline;
    if (o.has("tasks")) {
        const json& ts = o.at("tasks");
        if (!ts.is_array()) throw ConfigError("config.tasks: expected an array");
        for (std::size_t i = 0; i < ts.size(); ++i)
            p.tasks.push_back(task_from(ts[i], "config.tasks[" + std::to_string(i) + "]"));
    }
    p.specialist = o.has("specialist") ? spec_from(o.at("specialist"), "config.specialist", ModelFamily::specialist, {8})
                                       : spec_from(json::object(), "config.specialist", ModelFamily::specialist, {8});
    p.generalist = o.has("generalist")
                       ? spec_from(o.at("generalist"), "config.generalist", ModelFamily::generalist, {32, 32})
                       : spec_from(json::object(), "config.generalist", ModelFamily::generalist, {32, 32});
    if (!p.tasks.empty()) {
        // Model dimensions follow the tasks; validate() rejects tasks that disagree.
        for (ModelClassSpec* spec : {&p.specialist, &p.generalist}) {
            spec->d_x = p.tasks.front().d_x();
            spec->d_y = p.tasks.front().d_y();
        }
    }
    p.schedule = o.has("schedule") ? schedule_from(o.at("schedule"), "config.schedule") : Schedule{};
    SamplerConfig pseudo_default;
    pseudo_default.truncation = Truncation{0.0, 64, OverflowPolicy::clip};
    p.pseudo_sampler = o.has("pseudo_sampler") ? sampler_from(o.at("pseudo_sampler"), "config.pseudo_sampler", pseudo_default)
                                               : pseudo_default;
    if (o.has("scalarization")) p.scalarization = scalarization_from_json(o.at("scalarization"), "config.scalarization");
    p.specialist_opt = o.has("specialist_opt") ? optimizer_from(o.at("specialist_opt"), "config.specialist_opt")
                                               : OptimizerConfig{};
    p.generalist_opt = o.has("generalist_opt") ? optimizer_from(o.at("generalist_opt"), "config.generalist_opt")
                                               : OptimizerConfig{};
    p.n_labeled = o.get("n_labeled", p.n_labeled);
    p.n_pseudo = o.get("n_pseudo", p.n_pseudo);
    p.include_labeled_in_stage2 = o.get("include_labeled_in_stage2", p.include_labeled_in_stage2);
    p.warm_start = o.get("warm_start", p.warm_start);
    p.run_baseline = o.get("run_baseline", p.run_baseline);
    p.evaluate_specialists = o.get("evaluate_specialists", p.evaluate_specialists);
    p.allow_regime_violation = o.get("allow_regime_violation", p.allow_regime_violation);
    p.workers = workers;
    if (o.has("eval")) {
        Obj e(o.at("eval"), "config.eval");
        p.eval.n_conditions = e.get("n_conditions", p.eval.n_conditions);
        p.eval.samples_per_condition = e.get("samples_per_condition", p.eval.samples_per_condition);
        p.eval.bins = e.get("bins", p.eval.bins);
        p.eval.lp_draws = e.get("lp_draws", p.eval.lp_draws);
        if (e.has("sampler")) p.eval.sampler = sampler_from(e.at("sampler"), e.path("sampler"), p.eval.sampler);
        e.finish();
    }
    if (!c.seeds.empty()) p.seed = c.seeds.front();

    MdpPipelineConfig& m = c.mdp;
    if (o.has("envs")) {
        const json& es = o.at("envs");
        if (!es.is_array()) throw ConfigError("config.envs: expected an array");
        for (std::size_t i = 0; i < es.size(); ++i)
            m.envs.push_back(env_from(es[i], "config.envs[" + std::to_string(i) + "]"));
    }
    if (o.has("mdp")) {
        Obj mo(o.at("mdp"), "config.mdp");
        m.n_rollouts = mo.get("n_rollouts", m.n_rollouts);
        m.reuse_rollouts = mo.get("reuse_rollouts", m.reuse_rollouts);
        if (mo.has("policy_sampler"))
            m.policy_sampler = sampler_from(mo.at("policy_sampler"), mo.path("policy_sampler"), m.policy_sampler);
        if (mo.has("pseudo_sampler"))
            m.pseudo_sampler = sampler_from(mo.at("pseudo_sampler"), mo.path("pseudo_sampler"), m.policy_sampler);
        mo.finish();
    }
    m.specialist = p.specialist;
    m.generalist = p.generalist;
    m.schedule = p.schedule;
    m.scalarization = p.scalarization;
    m.specialist_opt = p.specialist_opt;
    m.generalist_opt = p.generalist_opt;
    m.n_labeled = p.n_labeled;
    m.n_pseudo = p.n_pseudo;
    m.include_labeled_in_stage2 = p.include_labeled_in_stage2;
    m.run_baseline = p.run_baseline;
    m.allow_regime_violation = p.allow_regime_violation;
    m.seed = p.seed;
    m.workers = workers;

    if (o.has("sweep")) {
        Obj s(o.at("sweep"), "config.sweep");
        c.sweep.n_grid = s.get("n_grid", c.sweep.n_grid);
        c.sweep.N_grid = s.get("N_grid", c.sweep.N_grid);
        c.sweep.baseline = s.get("baseline", c.sweep.baseline);
        s.finish();
    }
    if (o.has("pareto")) {
        Obj s(o.at("pareto"), "config.pareto");
        if (s.has("lambdas")) {
            const json& ls = s.at("lambdas");
            if (!ls.is_array()) throw ConfigError("config.pareto.lambdas: expected an array");
            for (const auto& l : ls) c.pareto.lambdas.push_back(vec_from(l, "config.pareto.lambdas"));
        }
        s.finish();
    }
    if (o.has("axioms")) {
        Obj s(o.at("axioms"), "config.axioms");
        c.axioms.k = s.get("k", c.axioms.k);
        c.axioms.n_samples = s.get("n_samples", c.axioms.n_samples);
        if (s.has("kinds")) {
            const json& ks = s.at("kinds");
            if (!ks.is_array()) throw ConfigError("config.axioms.kinds: expected an array");
            for (std::size_t i = 0; i < ks.size(); ++i)
                c.axioms.kinds.push_back(
                    scalarization_from_json(ks[i], "config.axioms.kinds[" + std::to_string(i) + "]"));
        }
        s.finish();
    }
    o.finish();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    if (!std::filesystem::exists(path)) throw ConfigNotFound("config file not found: " + path);
    std::ifstream in(path);
    if (!in) throw ConfigNotFound("config file not readable: " + path);
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
    const PipelineConfig& p = c.pipeline;
    json tasks = json::array();
    for (const auto& t : p.tasks) tasks.push_back(task_json(t));
    json envs = json::array();
    for (const auto& e : c.mdp.envs) envs.push_back(env_json(e));
    json lambdas = json::array();
    for (const auto& l : c.pareto.lambdas) lambdas.push_back(vec_json(l));
    json kinds = json::array();
    for (const auto& k : c.axioms.kinds) kinds.push_back(to_json(k));
    return {
        {"mode", to_string(c.mode)},
        {"name", c.name},
        {"seeds", c.seeds},
        {"output_dir", c.output_dir},
        {"workers", p.workers},
        {"tasks", tasks},
        {"envs", envs},
        {"specialist", to_json(p.specialist)},
        {"generalist", to_json(p.generalist)},
        {"schedule", {{"t0", p.schedule.t0}, {"t_max", p.schedule.t_max}, {"n_mc", p.schedule.n_mc}}},
        {"pseudo_sampler", to_json(p.pseudo_sampler)},
        {"scalarization", to_json(p.scalarization)},
        {"specialist_opt", optimizer_json(p.specialist_opt)},
        {"generalist_opt", optimizer_json(p.generalist_opt)},
        {"n_labeled", p.n_labeled},
        {"n_pseudo", p.n_pseudo},
        {"include_labeled_in_stage2", p.include_labeled_in_stage2},
        {"warm_start", p.warm_start},
        {"run_baseline", p.run_baseline},
        {"evaluate_specialists", p.evaluate_specialists},
        {"allow_regime_violation", p.allow_regime_violation},
        {"eval",
         {{"n_conditions", p.eval.n_conditions},
          {"samples_per_condition", p.eval.samples_per_condition},
          {"bins", p.eval.bins},
          {"lp_draws", p.eval.lp_draws},
          {"sampler", to_json(p.eval.sampler)}}},
        {"sweep", {{"n_grid", c.sweep.n_grid}, {"N_grid", c.sweep.N_grid}, {"baseline", c.sweep.baseline}}},
        {"pareto", {{"lambdas", lambdas}}},
        {"axioms", {{"k", c.axioms.k}, {"n_samples", c.axioms.n_samples}, {"kinds", kinds}}},
        {"mdp",
         {{"n_rollouts", c.mdp.n_rollouts},
          {"reuse_rollouts", c.mdp.reuse_rollouts},
          {"policy_sampler", to_json(c.mdp.policy_sampler)},
          {"pseudo_sampler", c.mdp.pseudo_sampler ? to_json(*c.mdp.pseudo_sampler) : json(nullptr)}}},
        {"save_checkpoints", c.save_checkpoints},
        {"save_pseudo", c.save_pseudo},
    };
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::string s = to_json(cfg).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<std::string> ExperimentConfig::validate() const {
    if (seeds.empty()) throw ConfigError("seeds: at least one seed required");
    try {
        switch (mode) {
            case Mode::distribution: return pipeline.validate();
            case Mode::sweep: {
                if (sweep.n_grid.empty() || sweep.N_grid.empty())
                    throw ConfigError("sweep: n_grid and N_grid must be non-empty");
                PipelineConfig p = pipeline;
                p.n_labeled = *std::min_element(sweep.n_grid.begin(), sweep.n_grid.end());
                p.n_pseudo = *std::max_element(sweep.N_grid.begin(), sweep.N_grid.end());
                auto w = p.validate();
                for (auto n : sweep.n_grid)
                    for (auto N : sweep.N_grid)
                        if (N < n) {
                            const std::string msg = "sweep cell (n=" + std::to_string(n) + ", N=" + std::to_string(N) +
                                                    ") violates N >= n";
                            if (!pipeline.allow_regime_violation) throw ConfigError(msg);
                            w.push_back(msg);
                        }
                return w;
            }
            case Mode::pareto: {
                if (pareto.lambdas.empty()) throw ConfigError("pareto: lambdas must be non-empty");
                PipelineConfig p = pipeline;
                for (const auto& l : pareto.lambdas) {
                    p.scalarization = Scalarization::linear(l);
                    p.validate();
                }
                p.scalarization = Scalarization::linear(pareto.lambdas.front());
                return p.validate();
            }
            case Mode::mdp: return mdp.validate();
            case Mode::axioms:
                if (axioms.k < 1 || axioms.n_samples < 1) throw ConfigError("axioms: k and n_samples must be positive");
                for (const auto& s : axioms.kinds) s.validate();
                return {};
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return {};
}

}  // namespace semidiff

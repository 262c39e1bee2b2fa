#include "semidiff/mdp.hpp"

#include "semidiff/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace semidiff {

namespace {

constexpr double kTinyGrid[3] = {0.0, 0.5, 1.0};

double snap_tiny(double v) {
    if (v < 0.25) return 0.0;
    if (v < 0.75) return 0.5;
    return 1.0;
}

Vec scalar(double v) { return Vec::Constant(1, v); }

int draw_time(double gamma, int H, Rng& rng) {
    if (gamma == 0.0) return 0;
    const double lg = std::log(gamma);
    while (true) {
        const double u = uniform(0.0, 1.0, rng);
        const double t = std::floor(std::log1p(-u) / lg);
        if (t < H) return static_cast<int>(t);
    }
}

Mat gather_cols(const Mat& m, const std::vector<Eigen::Index>& idx) {
    Mat out(m.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(idx[j]);
    return out;
}

// Per-rollout discounted returns over horizon H.
Vec rollout_returns(const MdpEnv& env, const Policy& policy, std::size_t n, std::uint64_t env_seed,
                    std::uint64_t policy_seed) {
    if (n < 1) throw std::invalid_argument("value_estimate: n_rollouts must be positive");
    Rng env_rng = make_rng(env_seed, {0xe1});
    Rng pol_rng = make_rng(policy_seed, {0xa1});
    const auto B = static_cast<Eigen::Index>(n);
    Mat states(env.d_y, B);
    for (Eigen::Index i = 0; i < B; ++i) states.col(i) = env.init(env_rng);
    Vec ret = Vec::Zero(B);
    double discount = 1.0;
    for (int step = 0; step < env.horizon(); ++step) {
        const Mat actions = policy.act(states, pol_rng);
        for (Eigen::Index i = 0; i < B; ++i) {
            ret(i) += discount * env.reward(states.col(i), actions.col(i));
            states.col(i) = env.transition(states.col(i), actions.col(i), env_rng);
        }
        discount *= env.gamma;
    }
    return ret;
}

}  // namespace

void EnvSpec::validate() const {
    if (kind != "reach" && kind != "tiny") throw std::invalid_argument("env: unknown kind '" + kind + "'");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("env: gamma must lie in [0, 1)");
    if (!(goal >= 0.0 && goal <= 1.0)) throw std::invalid_argument("env: goal must lie in [0, 1]");
    if (!(init_lo >= 0.0 && init_lo <= init_hi && init_hi <= 1.0))
        throw std::invalid_argument("env: init range must satisfy 0 <= init_lo <= init_hi <= 1");
    if (!(noise_std >= 0.0)) throw std::invalid_argument("env: noise_std must be non-negative");
    if (!(action_std > 0.0)) throw std::invalid_argument("env: action_std must be positive");
    if (!(reward_scale > 0.0)) throw std::invalid_argument("env: reward_scale must be positive");
}

double MdpEnv::reward(const Vec& s, const Vec& a) const {
    const double r = raw_reward(s, a);
    if (!(r >= -1.0 && r <= 1.0)) {
        reward_violations->fetch_add(1, std::memory_order_relaxed);
        return std::clamp(std::isnan(r) ? 0.0 : r, -1.0, 1.0);
    }
    return r;
}

int horizon_for(double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("horizon: gamma must lie in [0, 1)");
    if (gamma == 0.0) return 1;
    return std::max(1, static_cast<int>(std::ceil(std::log(1e-4) / std::log(gamma))));
}

int MdpEnv::horizon() const { return horizon_for(gamma); }

MdpEnv make_env(const EnvSpec& spec) {
    spec.validate();
    MdpEnv env;
    env.gamma = spec.gamma;
    const double goal = spec.goal, scale = spec.reward_scale;
    env.raw_reward = [goal, scale](const Vec& s, const Vec&) { return scale * (1.0 - 2.0 * std::abs(s(0) - goal)); };
    if (spec.kind == "reach") {
        const double lo = spec.init_lo, hi = spec.init_hi, noise = spec.noise_std;
        env.init = [lo, hi](Rng& rng) { return scalar(uniform(lo, hi, rng)); };
        env.transition = [noise](const Vec& s, const Vec& a, Rng& rng) {
            std::normal_distribution<double> n01;
            const double eps = n01(rng);
            return scalar(std::clamp(s(0) + a(0) + noise * eps, 0.0, 1.0));
        };
    } else {
        env.init = [](Rng& rng) {
            std::uniform_int_distribution<int> pick(0, 2);
            return scalar(kTinyGrid[pick(rng)]);
        };
        env.transition = [](const Vec& s, const Vec& a, Rng&) {
            return scalar(snap_tiny(std::clamp(s(0) + a(0), 0.0, 1.0)));
        };
    }
    return env;
}

ConditionalTask make_expert(const EnvSpec& spec) {
    spec.validate();
    AffineMap mean{Mat::Constant(1, 1, -spec.gain), scalar(spec.gain * spec.goal + spec.expert_shift)};
    return ConditionalTask::gaussian(std::move(mean), Mat::Constant(1, 1, spec.action_std * spec.action_std), {},
                                     "expert_" + spec.kind);
}

Policy gaussian_policy(const ConditionalTask& expert) {
    if (expert.components().size() != 1) throw std::invalid_argument("gaussian_policy: expert must be a single Gaussian");
    const GaussianComponent c = expert.components().front();
    const Mat L = c.cov.llt().matrixL();
    Policy p;
    p.act = [c, L](const Mat& states, Rng& rng) -> Mat {
        return c.mean.apply(states) + L * standard_normal(L.rows(), states.cols(), rng);
    };
    return p;
}

Policy diffusion_policy(const ScoreField& score, const SamplerConfig& cfg) {
    cfg.validate();
    Policy p;
    auto clips = std::make_shared<std::size_t>(0);
    p.clip_events = clips;
    p.act = [score, cfg, clips](const Mat& states, Rng& rng) -> Mat {
        if (!cfg.truncation) return sample_model(score, states, cfg, rng);
        TruncatedBatch b = sample_truncated(score, states, cfg, rng);
        *clips += b.clipped;
        return b.x;
    };
    return p;
}

VisitationBatch visitation_sample(const MdpEnv& env, const Policy& policy, std::size_t n, Rng& rng,
                                  bool reuse_rollouts, int pairs_per_rollout) {
    const int H = env.horizon();
    VisitationBatch out;
    out.states.resize(env.d_y, static_cast<Eigen::Index>(n));
    out.actions.resize(env.d_x, static_cast<Eigen::Index>(n));
    out.times.assign(n, 0);
    if (n == 0) return out;
    if (reuse_rollouts && pairs_per_rollout < 1) throw std::invalid_argument("visitation_sample: pairs_per_rollout < 1");

    const std::size_t per = reuse_rollouts ? static_cast<std::size_t>(pairs_per_rollout) : 1;
    const std::size_t R = (n + per - 1) / per;
    out.rollouts = R;
    // Pair j is recorded from rollout j / per at time times[j].
    std::vector<int> stop(R, 0);
    for (std::size_t j = 0; j < n; ++j) {
        out.times[j] = draw_time(env.gamma, H, rng);
        stop[j / per] = std::max(stop[j / per], out.times[j]);
    }
    Mat states(env.d_y, static_cast<Eigen::Index>(R));
    for (std::size_t r = 0; r < R; ++r) states.col(static_cast<Eigen::Index>(r)) = env.init(rng);
    const int t_end = *std::max_element(stop.begin(), stop.end());
    for (int t = 0; t <= t_end; ++t) {
        std::vector<Eigen::Index> live;
        for (std::size_t r = 0; r < R; ++r)
            if (stop[r] >= t) live.push_back(static_cast<Eigen::Index>(r));
        const Mat actions = policy.act(gather_cols(states, live), rng);
        if (actions.cols() != static_cast<Eigen::Index>(live.size()) || !actions.allFinite())
            throw std::runtime_error("visitation_sample: policy returned invalid actions at step " + std::to_string(t));
        for (std::size_t i = 0; i < live.size(); ++i) {
            const auto r = static_cast<std::size_t>(live[i]);
            for (std::size_t j = r * per; j < std::min(n, (r + 1) * per); ++j)
                if (out.times[j] == t) {
                    out.states.col(static_cast<Eigen::Index>(j)) = states.col(live[i]);
                    out.actions.col(static_cast<Eigen::Index>(j)) = actions.col(static_cast<Eigen::Index>(i));
                }
            if (stop[r] > t)
                states.col(live[i]) = env.transition(states.col(live[i]), actions.col(static_cast<Eigen::Index>(i)), rng);
        }
    }
    return out;
}

LabeledDataset collect_expert_demos(const MdpEnv& env, const ConditionalTask& expert, std::size_t n, Rng& rng,
                                    int task) {
    VisitationBatch v = visitation_sample(env, gaussian_policy(expert), n, rng);
    return LabeledDataset{task, std::move(v.actions), std::move(v.states)};
}

PseudoDataset collect_onpolicy_pseudo(const MdpEnv& env, const ScoreField& specialist, std::size_t N,
                                      const SamplerConfig& cfg, Rng& rng, int task, bool reuse_rollouts) {
    Policy policy = diffusion_policy(specialist, cfg);
    PseudoDataset out;
    out.task = task;
    out.provenance.specialist_id = "specialist_" + std::to_string(task);
    out.provenance.sampler = cfg;
    constexpr int kRetryBudget = 3;
    for (int attempt = 0;; ++attempt) {
        try {
            VisitationBatch v = visitation_sample(env, policy, N, rng, reuse_rollouts);
            out.x = std::move(v.actions);
            out.y = std::move(v.states);
            break;
        } catch (const SamplingError&) {
            if (attempt + 1 >= kRetryBudget) throw;
        }
    }
    out.accepted.assign(N, 1);
    out.retries.assign(N, 0);
    out.provenance.attempts = N;
    out.provenance.accepted = N;
    out.provenance.clipped = *policy.clip_events;
    return out;
}

ValueEstimate value_estimate(const MdpEnv& env, const Policy& policy, std::size_t n_rollouts, std::uint64_t env_seed,
                             std::uint64_t policy_seed) {
    const Vec ret = rollout_returns(env, policy, n_rollouts, env_seed, policy_seed);
    const LossEstimate e = LossEstimate::from_terms(ret);
    ValueEstimate v;
    v.value = e.value;
    v.std_err = e.std_err;
    v.n_rollouts = n_rollouts;
    v.truncation_bias = std::pow(env.gamma, env.horizon()) / (1.0 - env.gamma);
    return v;
}

GapEstimate suboptimality(const MdpEnv& env, const Policy& expert, const Policy& learned, std::size_t n_rollouts,
                          std::uint64_t seed) {
    const std::uint64_t env_seed = derive_seed(seed, {1});
    const Vec re = rollout_returns(env, expert, n_rollouts, env_seed, derive_seed(seed, {2}));
    const Vec rl = rollout_returns(env, learned, n_rollouts, env_seed, derive_seed(seed, {3}));
    const double bias = std::pow(env.gamma, env.horizon()) / (1.0 - env.gamma);
    GapEstimate g;
    const LossEstimate e = LossEstimate::from_terms(re), l = LossEstimate::from_terms(rl);
    const LossEstimate d = LossEstimate::from_terms(Vec(re - rl));
    g.expert = {e.value, e.std_err, bias, n_rollouts};
    g.learned = {l.value, l.std_err, bias, n_rollouts};
    g.gap = d.value;
    g.std_err = d.std_err;
    return g;
}

TinyOracle tiny_oracle(const EnvSpec& spec, const ConditionalTask& policy) {
    if (spec.kind != "tiny") throw std::invalid_argument("tiny_oracle: env kind must be 'tiny'");
    if (policy.components().size() != 1 || policy.d_x() != 1 || policy.d_y() != 1)
        throw std::invalid_argument("tiny_oracle: policy must be a 1D single Gaussian");
    const MdpEnv env = make_env(spec);
    const auto& c = policy.components().front();
    const double sd = std::sqrt(c.cov(0, 0));
    TinyOracle o;
    o.grid = Vec(3);
    o.grid << kTinyGrid[0], kTinyGrid[1], kTinyGrid[2];
    o.transition = Mat::Zero(3, 3);
    Vec r(3);
    for (int i = 0; i < 3; ++i) {
        const double s = o.grid(i);
        const double m = c.mean(scalar(s))(0);
        const double p_low = normal_cdf((0.25 - s - m) / sd);
        const double p_high = 1.0 - normal_cdf((0.75 - s - m) / sd);
        o.transition(i, 0) = p_low;
        o.transition(i, 2) = p_high;
        o.transition(i, 1) = 1.0 - p_low - p_high;
        r(i) = env.reward(scalar(s), scalar(0.0));
    }
    const Vec rho = Vec::Constant(3, 1.0 / 3.0);
    const Mat M = Mat::Identity(3, 3) - spec.gamma * o.transition;
    const auto lu = M.partialPivLu();
    o.values = lu.solve(r);
    o.occupancy = (1.0 - spec.gamma) * M.transpose().partialPivLu().solve(rho);
    o.value = rho.dot(o.values);
    return o;
}

PerformanceDifference performance_difference_check(const MdpEnv& env, const ConditionalTask& expert,
                                                   const Policy& learned, std::size_t n_rollouts, int state_bins,
                                                   int samples_per_state, std::uint64_t seed) {
    if (state_bins < 1) throw std::invalid_argument("performance_difference_check: state_bins must be positive");
    PerformanceDifference pd;
    pd.gap = suboptimality(env, gaussian_policy(expert), learned, n_rollouts, seed);

    Rng rng = make_rng(seed, {0x9d});
    const VisitationBatch v = visitation_sample(env, gaussian_policy(expert), n_rollouts, rng);
    std::vector<double> count(static_cast<std::size_t>(state_bins), 0.0), sum(static_cast<std::size_t>(state_bins), 0.0);
    for (Eigen::Index j = 0; j < v.states.cols(); ++j) {
        const double s = v.states(0, j);
        const auto b = static_cast<std::size_t>(std::clamp(static_cast<int>(s * state_bins), 0, state_bins - 1));
        count[b] += 1.0;
        sum[b] += s;
    }
    const double total = static_cast<double>(v.states.cols());
    double mean_tv = 0.0, var = 0.0;
    for (std::size_t b = 0; b < count.size(); ++b) {
        if (count[b] == 0.0) continue;
        const Vec s = scalar(sum[b] / count[b]);
        const Mat actions = learned.act(s.replicate(1, samples_per_state), rng);
        const TvEstimate tv = tv_conditional(actions, expert, s, 100, 1);
        const double w = count[b] / total;
        mean_tv += w * tv.value;
        var += w * tv.value * tv.value;
    }
    pd.mean_tv = mean_tv;
    pd.mean_tv_se = std::sqrt(std::max(0.0, var - mean_tv * mean_tv) / total);
    const double factor = 2.0 / ((1.0 - env.gamma) * (1.0 - env.gamma));
    pd.bound = factor * mean_tv;
    pd.margin = 3.0 * (pd.gap.std_err + factor * pd.mean_tv_se);
    return pd;
}

MdpPipelineConfig::MdpPipelineConfig() {
    policy_sampler.n_steps = 100;
    policy_sampler.truncation = Truncation{0.0, 64, OverflowPolicy::clip};
    specialist.family = ModelFamily::specialist;
    generalist.family = ModelFamily::generalist;
    generalist.widths = {32, 32};
}

std::vector<std::string> MdpPipelineConfig::validate() const {
    if (envs.empty()) throw std::invalid_argument("mdp: at least one environment required");
    for (const auto& e : envs) e.validate();
    std::vector<ConditionalTask> experts;
    for (const auto& e : envs) experts.push_back(make_expert(e));
    auto warnings = as_pipeline(experts).validate();
    if (n_rollouts < 1) throw std::invalid_argument("mdp: n_rollouts must be positive");
    return warnings;
}

SamplerConfig MdpPipelineConfig::resolved_policy_sampler() const {
    SamplerConfig s = policy_sampler;
    if (!s.truncation) s.truncation = Truncation{};
    if (s.truncation->radius <= 0.0) s.truncation->radius = default_truncation_radius(n_pseudo, envs.size());
    return s;
}

PipelineConfig MdpPipelineConfig::as_pipeline(const std::vector<ConditionalTask>& experts) const {
    PipelineConfig p;
    p.tasks = experts;
    p.specialist = specialist;
    p.generalist = generalist;
    p.schedule = schedule;
    p.pseudo_sampler = pseudo_sampler.value_or(policy_sampler);
    p.scalarization = scalarization;
    p.specialist_opt = specialist_opt;
    p.generalist_opt = generalist_opt;
    p.n_labeled = n_labeled;
    p.n_pseudo = n_pseudo;
    p.seed = seed;
    p.include_labeled_in_stage2 = include_labeled_in_stage2;
    p.run_baseline = run_baseline;
    p.allow_regime_violation = allow_regime_violation;
    p.workers = workers;
    p.eval.sampler = policy_sampler;
    p.eval.sampler.truncation.reset();
    return p;
}

Vec MdpResult::gaps() const {
    Vec v(static_cast<Eigen::Index>(generalist_gaps.size()));
    for (std::size_t k = 0; k < generalist_gaps.size(); ++k) v(static_cast<Eigen::Index>(k)) = generalist_gaps[k].gap;
    return v;
}

Vec MdpResult::baseline_gap_vector() const {
    Vec v(static_cast<Eigen::Index>(baseline_gaps.size()));
    for (std::size_t k = 0; k < baseline_gaps.size(); ++k) v(static_cast<Eigen::Index>(k)) = baseline_gaps[k].gap;
    return v;
}

MdpResult run_mdp_pipeline(const MdpPipelineConfig& cfg) {
    MdpResult res;
    res.seed = cfg.seed;
    res.warnings = cfg.validate();
    std::vector<MdpEnv> envs;
    std::vector<ConditionalTask> experts;
    for (const auto& e : cfg.envs) {
        envs.push_back(make_env(e));
        experts.push_back(make_expert(e));
    }
    const PipelineConfig pcfg = cfg.as_pipeline(experts);
    const std::size_t K = envs.size();

    for (std::size_t k = 0; k < K; ++k) {
        Rng rng = make_rng(cfg.seed, {1, k});
        res.demos.push_back(collect_expert_demos(envs[k], experts[k], cfg.n_labeled, rng, static_cast<int>(k)));
    }
    for (auto& t : train_specialists(pcfg, res.demos)) res.specialists.push_back(std::move(t.model));

    const SamplerConfig pseudo_sampler = pcfg.resolved_pseudo_sampler();
    for (std::size_t k = 0; k < K; ++k) {
        Rng rng = make_rng(cfg.seed, {3, k});
        try {
            res.pseudo.push_back(collect_onpolicy_pseudo(envs[k], res.specialists[k].field(), cfg.n_pseudo, pseudo_sampler,
                                                         rng, static_cast<int>(k), cfg.reuse_rollouts));
        } catch (const std::exception& e) {
            throw PipelineError("pseudo", static_cast<int>(k), e.what());
        }
        res.clip_events += res.pseudo.back().provenance.clipped;
    }

    try {
        auto g = train_generalist(res.pseudo, res.specialists, seeded_generalist_spec(pcfg), cfg.scalarization,
                                  seeded_generalist_opt(pcfg), cfg.schedule,
                                  cfg.include_labeled_in_stage2 ? &res.demos : nullptr);
        res.generalist = std::move(g.model);
        res.generalist_trace = std::move(g.trace);
    } catch (const std::exception& e) {
        throw PipelineError("stage2", -1, e.what());
    }
    if (cfg.run_baseline) {
        try {
            auto b = train_labeled_only(res.demos, seeded_generalist_spec(pcfg), cfg.scalarization,
                                        seeded_baseline_opt(pcfg), cfg.schedule);
            res.baseline = std::move(b.model);
            res.baseline_trace = std::move(b.trace);
        } catch (const std::exception& e) {
            throw PipelineError("baseline", -1, e.what());
        }
    }

    const SamplerConfig sampler = cfg.resolved_policy_sampler();
    for (std::size_t k = 0; k < K; ++k) {
        const std::uint64_t gap_seed = derive_seed(cfg.seed, {10, k});
        const Policy expert = gaussian_policy(experts[k]);
        const Policy spec_pol = diffusion_policy(res.specialists[k].field(), sampler);
        const Policy gen_pol = diffusion_policy(res.generalist->field(), sampler);
        res.specialist_gaps.push_back(suboptimality(envs[k], expert, spec_pol, cfg.n_rollouts, gap_seed));
        res.generalist_gaps.push_back(suboptimality(envs[k], expert, gen_pol, cfg.n_rollouts, gap_seed));
        res.clip_events += *spec_pol.clip_events + *gen_pol.clip_events;
        if (res.baseline) {
            const Policy base_pol = diffusion_policy(res.baseline->field(), sampler);
            res.baseline_gaps.push_back(suboptimality(envs[k], expert, base_pol, cfg.n_rollouts, gap_seed));
            res.clip_events += *base_pol.clip_events;
        }
        res.reward_violations += envs[k].reward_violations->load();
    }
    Scalarization exact = cfg.scalarization;
    exact.smoothing_temp = 0.0;
    res.scalarized_gap = evaluate(exact, res.gaps());
    if (res.baseline) res.baseline_scalarized_gap = evaluate(exact, res.baseline_gap_vector());
    if (res.clip_events > 0)
        res.warnings.push_back(std::to_string(res.clip_events) + " action draws clipped into B_R");
    return res;
}

}  // namespace semidiff

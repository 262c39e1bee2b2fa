#include "semidiff/mdp.hpp"

#include <doctest.h>

#include <cmath>

using namespace semidiff;

namespace {

EnvSpec tiny_spec() {
    EnvSpec s;
    s.kind = "tiny";
    s.goal = 1.0;
    s.gamma = 0.8;
    s.gain = 0.4;
    s.action_std = 0.3;
    return s;
}

int grid_index(double s) { return s < 0.25 ? 0 : (s < 0.75 ? 1 : 2); }

}  // namespace

TEST_CASE("horizon and gamma = 0") {
    CHECK(horizon_for(0.0) == 1);
    for (double g : {0.5, 0.9, 0.99}) {
        const int h = horizon_for(g);
        CHECK(std::pow(g, h) <= 1e-4);
        CHECK(std::pow(g, h - 1) > 1e-4);
    }

    EnvSpec spec;
    spec.gamma = 0.0;
    spec.init_lo = 0.2;
    spec.init_hi = 0.3;
    const MdpEnv env = make_env(spec);
    Rng rng = make_rng(61);
    const VisitationBatch b = visitation_sample(env, gaussian_policy(make_expert(spec)), 500, rng);
    CHECK(b.states.cols() == 500);
    for (int t : b.times) CHECK(t == 0);
    CHECK(b.states.minCoeff() >= 0.2);
    CHECK(b.states.maxCoeff() <= 0.3);
}

TEST_CASE("env validation") {
    EnvSpec s;
    s.gamma = 1.0;
    CHECK_THROWS(make_env(s));
    s = EnvSpec{};
    s.kind = "maze";
    CHECK_THROWS(make_env(s));
    s = EnvSpec{};
    s.init_lo = 0.8;
    s.init_hi = 0.2;
    CHECK_THROWS(make_env(s));
}

TEST_CASE("tiny env occupancy and value match the exact oracle") {
    const EnvSpec spec = tiny_spec();
    const MdpEnv env = make_env(spec);
    const ConditionalTask expert = make_expert(spec);
    const TinyOracle oracle = tiny_oracle(spec, expert);
    CHECK(oracle.occupancy.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((oracle.transition.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);

    Rng rng = make_rng(62);
    const int n = 100000;
    const VisitationBatch b = visitation_sample(env, gaussian_policy(expert), n, rng);
    Vec occ = Vec::Zero(3);
    for (Eigen::Index i = 0; i < b.states.cols(); ++i) occ(grid_index(b.states(0, i))) += 1.0 / n;
    CHECK((occ - oracle.occupancy).lpNorm<1>() < 0.02);

    const ValueEstimate v = value_estimate(env, gaussian_policy(expert), 20000, 7, 8);
    CHECK(std::abs(v.value - oracle.value) < 2.0 * v.std_err + v.truncation_bias);
    CHECK(v.n_rollouts == 20000);
}

TEST_CASE("constant reward gives the truncated geometric series") {
    EnvSpec spec;
    spec.gamma = 0.9;
    MdpEnv env = make_env(spec);
    env.raw_reward = [](const Vec&, const Vec&) { return 0.5; };
    const ValueEstimate v = value_estimate(env, gaussian_policy(make_expert(spec)), 100, 1, 2);
    const int h = env.horizon();
    CHECK(v.value == doctest::Approx(0.5 * (1.0 - std::pow(0.9, h)) / 0.1).epsilon(1e-12));
    CHECK(v.std_err < 1e-12);
    CHECK(v.truncation_bias == doctest::Approx(std::pow(0.9, h) / 0.1));
}

TEST_CASE("suboptimality") {
    EnvSpec spec;
    spec.goal = 0.7;
    const MdpEnv env = make_env(spec);
    const Policy expert = gaussian_policy(make_expert(spec));
    const GapEstimate self = suboptimality(env, expert, expert, 4000, 3);
    CHECK(std::abs(self.gap) <= 3.0 * self.std_err + 1e-12);

    double prev = -1e9;
    for (double delta : {0.0, 0.1, 0.2, 0.4}) {
        EnvSpec shifted = spec;
        shifted.expert_shift = delta;
        const GapEstimate g = suboptimality(env, expert, gaussian_policy(make_expert(shifted)), 4000, 3);
        INFO("delta = " << delta);
        CHECK(g.gap > prev);
        prev = g.gap;
    }
    CHECK(prev > 0.0);
}

TEST_CASE("demonstrations and on-policy pseudo-data") {
    EnvSpec spec;
    spec.goal = 0.3;
    const MdpEnv env = make_env(spec);
    const ConditionalTask expert = make_expert(spec);
    Rng rng = make_rng(63);
    const LabeledDataset demos = collect_expert_demos(env, expert, 300, rng, 1);
    CHECK(demos.size() == 300);
    CHECK(demos.task == 1);
    CHECK(demos.y.minCoeff() >= 0.0);
    CHECK(demos.y.maxCoeff() <= 1.0);

    SamplerConfig sc;
    sc.n_steps = 20;
    sc.truncation = Truncation{};
    const PseudoDataset one = collect_onpolicy_pseudo(env, expert.oracle_field(), 1, sc, rng);
    CHECK(one.size() == 1);
    CHECK(std::abs(one.x(0, 0)) <= sc.truncation->radius);
    const PseudoDataset many = collect_onpolicy_pseudo(env, expert.oracle_field(), 64, sc, rng, 0, true);
    CHECK(many.size() == 64);
    CHECK(env.reward_violations->load() == 0);
}

TEST_CASE("rewards outside [-1, 1] are clamped and counted") {
    EnvSpec spec;
    spec.reward_scale = 3.0;
    const MdpEnv env = make_env(spec);
    Vec s = Vec::Constant(1, spec.goal), a = Vec::Zero(1);
    CHECK(env.reward(s, a) == 1.0);
    CHECK(env.reward_violations->load() == 1);

    const MdpEnv plain = make_env(EnvSpec{});
    value_estimate(plain, gaussian_policy(make_expert(EnvSpec{})), 200, 1, 1);
    CHECK(plain.reward_violations->load() == 0);
}

TEST_CASE("performance-difference bound holds for a perturbed policy") {
    EnvSpec spec;
    spec.goal = 0.6;
    const MdpEnv env = make_env(spec);
    EnvSpec shifted = spec;
    shifted.expert_shift = 0.15;
    const PerformanceDifference pd = performance_difference_check(
        env, make_expert(spec), gaussian_policy(make_expert(shifted)), 2000, 10, 10000, 9);
    CHECK(pd.mean_tv > 0.0);
    CHECK(pd.holds());
}

TEST_CASE("policy sampler resolves the default truncation radius") {
    MdpPipelineConfig cfg;
    cfg.envs = {EnvSpec{}, EnvSpec{}};
    cfg.n_pseudo = 500;
    const SamplerConfig s = cfg.resolved_policy_sampler();
    REQUIRE(s.truncation);
    CHECK(s.truncation->radius == doctest::Approx(default_truncation_radius(500, 2)));
    cfg.policy_sampler.truncation = Truncation{3.0};
    CHECK(cfg.resolved_policy_sampler().truncation->radius == 3.0);
}

#include "semidiff/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace semidiff {

namespace {

struct AxisRange {
    double lo = 0.0;
    double hi = 0.0;
};

// +-6 std of every component along axis i, joined with the sample range.
AxisRange axis_range(const ConditionalTask& task, const Vec& y, const Mat& samples, int i) {
    AxisRange r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& c : task.components()) {
        const double mu = c.mean(y)(i);
        const double sd = std::sqrt(c.cov(i, i));
        r.lo = std::min(r.lo, mu - 6.0 * sd);
        r.hi = std::max(r.hi, mu + 6.0 * sd);
    }
    if (samples.cols() > 0) {
        r.lo = std::min(r.lo, samples.row(i).minCoeff());
        r.hi = std::max(r.hi, samples.row(i).maxCoeff());
    }
    return r;
}

int bin_index(double v, const AxisRange& r, int bins) {
    const double f = (v - r.lo) / (r.hi - r.lo);
    return std::clamp(static_cast<int>(std::floor(f * bins)), 0, bins - 1);
}

double edge(const AxisRange& r, int i, int bins) {
    return i == bins ? r.hi : r.lo + (r.hi - r.lo) * static_cast<double>(i) / bins;
}

// 5-point Gauss-Legendre on [-1, 1].
constexpr double kGlNode[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                               0.9061798459386640};
constexpr double kGlWeight[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                 0.4786286704993665, 0.2369268850561891};

Vec mean_and_se(const std::vector<Vec>& xs, Vec* se) {
    const Eigen::Index k = xs.front().size();
    Vec mean = Vec::Zero(k);
    for (const auto& x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    *se = Vec::Zero(k);
    if (xs.size() > 1) {
        for (const auto& x : xs) *se += (x - mean).cwiseAbs2();
        *se = (*se / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size())).cwiseSqrt();
    }
    return mean;
}

}  // namespace

TvEstimate tv_conditional(const Mat& samples, const ConditionalTask& task, const Vec& y, int bins,
                          std::size_t min_samples) {
    const int d = task.d_x();
    if (d > 2) throw std::invalid_argument("tv_conditional: only d_x <= 2 is supported");
    if (samples.rows() != d) throw std::invalid_argument("tv_conditional: sample dimension mismatch");
    if (static_cast<std::size_t>(samples.cols()) < min_samples)
        throw std::invalid_argument("tv_conditional: need at least " + std::to_string(min_samples) + " samples, got " +
                                    std::to_string(samples.cols()));
    if (bins < 1) throw std::invalid_argument("tv_conditional: bins must be positive");
    if (!samples.allFinite()) throw std::invalid_argument("tv_conditional: non-finite samples");

    const double n = static_cast<double>(samples.cols());
    TvEstimate est;
    est.method = "histogram";
    est.n_samples = static_cast<std::size_t>(samples.cols());

    if (d == 1) {
        const AxisRange r = axis_range(task, y, samples, 0);
        std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
        for (Eigen::Index j = 0; j < samples.cols(); ++j) counts[bin_index(samples(0, j), r, bins)] += 1.0;
        double l1 = 0.0, covered = 0.0;
        for (int b = 0; b < bins; ++b) {
            const double m = task.box_mass(Vec::Constant(1, edge(r, b, bins)), Vec::Constant(1, edge(r, b + 1, bins)), y);
            covered += m;
            l1 += std::abs(counts[static_cast<std::size_t>(b)] / n - m);
        }
        est.value = 0.5 * (l1 + std::max(0.0, 1.0 - covered));
        est.resolution = bins;
    } else {
        const int b = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(bins))));
        const AxisRange r0 = axis_range(task, y, samples, 0), r1 = axis_range(task, y, samples, 1);
        std::vector<double> counts(static_cast<std::size_t>(b * b), 0.0);
        for (Eigen::Index j = 0; j < samples.cols(); ++j)
            counts[static_cast<std::size_t>(bin_index(samples(0, j), r0, b) * b + bin_index(samples(1, j), r1, b))] +=
                1.0;
        double l1 = 0.0, covered = 0.0;
        for (int i = 0; i < b; ++i)
            for (int k = 0; k < b; ++k) {
                Vec lo(2), hi(2);
                lo << edge(r0, i, b), edge(r1, k, b);
                hi << edge(r0, i + 1, b), edge(r1, k + 1, b);
                const double m = task.box_mass(lo, hi, y);
                covered += m;
                l1 += std::abs(counts[static_cast<std::size_t>(i * b + k)] / n - m);
            }
        est.value = 0.5 * (l1 + std::max(0.0, 1.0 - covered));
        est.resolution = b * b;
    }
    est.value = std::clamp(est.value, 0.0, 1.0);
    return est;
}

TvEstimate tv_between(const std::function<double(double)>& p, const std::function<double(double)>& q, double lo,
                      double hi, int panels) {
    if (!(hi > lo)) throw std::invalid_argument("tv_between: empty integration range");
    if (panels < 1) throw std::invalid_argument("tv_between: panels must be positive");
    const double h = (hi - lo) / panels;
    double sum = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double mid = lo + (i + 0.5) * h;
        for (int j = 0; j < 5; ++j) {
            const double x = mid + 0.5 * h * kGlNode[j];
            sum += kGlWeight[j] * std::abs(p(x) - q(x));
        }
    }
    TvEstimate est;
    est.value = std::clamp(0.25 * h * sum, 0.0, 1.0);
    est.method = "grid-quadrature";
    est.resolution = 5 * panels;
    return est;
}

TvEstimate tv_between(const ConditionalTask& a, const Vec& y_a, const ConditionalTask& b, const Vec& y_b) {
    if (a.d_x() != 1 || b.d_x() != 1) throw std::invalid_argument("tv_between: only d_x = 1 tasks are supported");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto* t : {&a, &b})
        for (const auto& c : t->components()) {
            const Vec& y = t == &a ? y_a : y_b;
            const double mu = c.mean(y)(0), sd = std::sqrt(c.cov(0, 0));
            lo = std::min(lo, mu - 10.0 * sd);
            hi = std::max(hi, mu + 10.0 * sd);
        }
    auto pa = [&](double x) { return a.density(Vec::Constant(1, x), y_a); };
    auto pb = [&](double x) { return b.density(Vec::Constant(1, x), y_b); };
    return tv_between(pa, pb, lo, hi);
}

TvEstimate tv_expected(const ScoreField& model, const ConditionalTask& task, int n_conditions,
                       int samples_per_condition, int bins, const SamplerConfig& sampler, Rng& rng) {
    if (n_conditions < 1) throw std::invalid_argument("tv_expected: n_conditions must be positive");
    if (samples_per_condition < 1) throw std::invalid_argument("tv_expected: samples_per_condition must be positive");
    const Mat ys = task.sample_conditions(n_conditions, rng);
    std::vector<double> values;
    TvEstimate est;
    for (int c = 0; c < n_conditions; ++c) {
        const Vec y = ys.col(c);
        const Mat y_rep = y.replicate(1, samples_per_condition);
        const Mat x = sample_model(model, y_rep, sampler, rng);
        const TvEstimate one = tv_conditional(x, task, y, bins);
        values.push_back(one.value);
        est.resolution = one.resolution;
        est.n_samples += one.n_samples;
    }
    est.method = "histogram";
    est.value = LossEstimate::from_terms(values).value;
    est.std_err = LossEstimate::from_terms(values).std_err;
    return est;
}

bool dominates(const Vec& a, const Vec& b, const Vec& margin) {
    if (a.size() != b.size() || a.size() != margin.size()) throw std::invalid_argument("dominates: length mismatch");
    bool strict = false;
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        if (a(k) + margin(k) > b(k)) return false;
        if (a(k) + margin(k) < b(k)) strict = true;
    }
    return strict;
}

void flag_dominated(std::vector<ParetoPoint>& points) {
    for (auto& p : points) p.dominated = false;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (i == j) continue;
            const Vec margin = (points[i].tv_se.cwiseAbs2() + points[j].tv_se.cwiseAbs2()).cwiseSqrt();
            if (dominates(points[j].tv, points[i].tv, margin)) {
                points[i].dominated = true;
                break;
            }
        }
}

ParetoFront pareto_sweep(const PipelineConfig& base, const std::vector<Vec>& lambdas,
                         const std::vector<std::uint64_t>& seeds) {
    if (lambdas.empty()) throw std::invalid_argument("pareto_sweep: empty lambda grid");
    if (seeds.empty()) throw std::invalid_argument("pareto_sweep: no seeds");
    const std::size_t K = base.tasks.size();
    for (const auto& l : lambdas) Scalarization::linear(l).validate();
    for (const auto& l : lambdas)
        if (l.size() != static_cast<Eigen::Index>(K))
            throw std::invalid_argument("pareto_sweep: lambda length must equal the number of tasks");

    ParetoFront front;
    front.seeds = seeds;
    for (const auto seed : seeds) {
        PipelineConfig cfg = base;
        cfg.seed = seed;
        cfg.scalarization = Scalarization::linear(lambdas.front());
        cfg.validate();
        const auto labeled = draw_labeled(cfg, cfg.n_labeled);
        std::vector<ScoreModel> specialists;
        for (auto& t : train_specialists(cfg, labeled)) specialists.push_back(std::move(t.model));
        const auto pseudo = generate_all_pseudo(cfg, specialists, draw_pools(cfg, cfg.n_pseudo));

        std::vector<ParetoPoint> row;
        for (std::size_t i = 0; i < lambdas.size(); ++i) {
            const Scalarization s = Scalarization::linear(lambdas[i]);
            const TrainResult g = train_generalist(pseudo, specialists, seeded_generalist_spec(cfg), s,
                                                   seeded_generalist_opt(cfg), cfg.schedule,
                                                   cfg.include_labeled_in_stage2 ? &labeled : nullptr);
            const ModelReport rep = evaluate_model(g.model.field(), cfg.tasks, s, cfg.eval, cfg.schedule, seed);
            ParetoPoint p;
            p.label = s.id();
            p.lambda = lambdas[i];
            p.tv = rep.tv();
            p.lp = rep.lp();
            p.tv_se.resize(static_cast<Eigen::Index>(K));
            p.lp_se.resize(static_cast<Eigen::Index>(K));
            for (std::size_t k = 0; k < K; ++k) {
                p.tv_se(static_cast<Eigen::Index>(k)) = rep.per_task[k].tv_se;
                p.lp_se(static_cast<Eigen::Index>(k)) = rep.per_task[k].lp_se;
            }
            p.checkpoint_id = "pareto_seed" + std::to_string(seed) + "_l" + std::to_string(i);
            row.push_back(std::move(p));
        }
        front.per_seed.push_back(std::move(row));
    }

    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        std::vector<Vec> tvs, lps;
        for (const auto& row : front.per_seed) {
            tvs.push_back(row[i].tv);
            lps.push_back(row[i].lp);
        }
        ParetoPoint p = front.per_seed.front()[i];
        if (seeds.size() > 1) {
            p.tv = mean_and_se(tvs, &p.tv_se);
            p.lp = mean_and_se(lps, &p.lp_se);
            p.checkpoint_id = "pareto_l" + std::to_string(i);
        }
        front.points.push_back(std::move(p));
    }
    flag_dominated(front.points);
    for (auto& row : front.per_seed) flag_dominated(row);
    return front;
}

std::vector<SweepRow> complexity_sweep(const PipelineConfig& base, const std::vector<std::size_t>& n_grid,
                                       const std::vector<std::size_t>& N_grid,
                                       const std::vector<std::uint64_t>& seeds, bool include_baseline) {
    if (n_grid.empty() || N_grid.empty()) throw std::invalid_argument("complexity_sweep: grids must be non-empty");
    if (seeds.empty()) throw std::invalid_argument("complexity_sweep: no seeds");
    using clock = std::chrono::steady_clock;
    auto seconds_since = [](clock::time_point t0) {
        return std::chrono::duration<double>(clock::now() - t0).count();
    };
    const std::size_t N_max = *std::max_element(N_grid.begin(), N_grid.end());
    std::vector<SweepRow> rows;
    for (const auto seed : seeds) {
        PipelineConfig cfg = base;
        cfg.seed = seed;
        cfg.n_pseudo = N_max;
        for (const auto n : n_grid)
            for (const auto N : N_grid)
                if (N < n && !cfg.allow_regime_violation)
                    throw std::invalid_argument("complexity_sweep: cell (n=" + std::to_string(n) + ", N=" +
                                                std::to_string(N) + ") violates N >= n");
        cfg.n_labeled = *std::min_element(n_grid.begin(), n_grid.end());
        cfg.allow_regime_violation = true;
        cfg.validate();
        const auto pools = draw_pools(cfg, N_max);

        for (const auto n : n_grid) {
            cfg.n_labeled = n;
            const auto t_stage1 = clock::now();
            const auto labeled = draw_labeled(cfg, n);
            std::vector<ScoreModel> specialists;
            for (auto& t : train_specialists(cfg, labeled)) specialists.push_back(std::move(t.model));
            const auto pseudo_full = generate_all_pseudo(cfg, specialists, pools);
            const double stage1_s = seconds_since(t_stage1);

            for (const auto N : N_grid) {
                const auto t0 = clock::now();
                std::vector<PseudoDataset> pseudo;
                for (const auto& p : pseudo_full) pseudo.push_back(p.head(static_cast<Eigen::Index>(N)));
                const TrainResult g =
                    train_generalist(pseudo, specialists, seeded_generalist_spec(cfg), cfg.scalarization,
                                     seeded_generalist_opt(cfg), cfg.schedule,
                                     cfg.include_labeled_in_stage2 ? &labeled : nullptr);
                SweepRow row;
                row.seed = seed;
                row.n = n;
                row.N = N;
                row.method = "semi";
                row.scalarization = cfg.scalarization.id();
                row.report = evaluate_model(g.model.field(), cfg.tasks, cfg.scalarization, cfg.eval, cfg.schedule, seed);
                row.runtime_s = stage1_s + seconds_since(t0);
                rows.push_back(std::move(row));
            }
            if (include_baseline) {
                const auto t0 = clock::now();
                const TrainResult b = train_labeled_only(labeled, seeded_generalist_spec(cfg), cfg.scalarization,
                                                         seeded_baseline_opt(cfg), cfg.schedule);
                SweepRow row;
                row.seed = seed;
                row.n = n;
                row.N = 0;
                row.method = "labeled";
                row.scalarization = cfg.scalarization.id();
                row.report = evaluate_model(b.model.field(), cfg.tasks, cfg.scalarization, cfg.eval, cfg.schedule, seed);
                row.runtime_s = seconds_since(t0);
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

}  // namespace semidiff

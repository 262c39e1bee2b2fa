#include "semidiff/experiment.hpp"

#include "semidiff/checkpoint.hpp"
#include "semidiff/evaluation.hpp"
#include "semidiff/losses.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#ifndef SEMIDIFF_VERSION
#define SEMIDIFF_VERSION "0.0.0"
#endif
#ifndef SEMIDIFF_GIT_REV
#define SEMIDIFF_GIT_REV ""
#endif

namespace semidiff {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kResultsHeader =
    "mode,method,seed,n,N,lambda,scalarization,task,metric,value,std_err,config_hash,version";

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string lambda_str(const Vec& l) {
    std::string s;
    for (Eigen::Index i = 0; i < l.size(); ++i) s += (i ? ";" : "") + short_num(l(i));
    return s;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

class Recorder {
public:
    Recorder(std::string mode, std::uint64_t seed) : mode_(std::move(mode)), seed_(seed) {}

    ResultRow base(const std::string& method) const {
        ResultRow r;
        r.mode = mode_;
        r.method = method;
        r.seed = seed_;
        return r;
    }

    void report(std::vector<ResultRow>& rows, ResultRow tmpl, const ModelReport& rep) const {
        for (std::size_t k = 0; k < rep.per_task.size(); ++k) {
            ResultRow r = tmpl;
            r.task = std::to_string(k);
            r.metric = "tv";
            r.value = rep.per_task[k].tv;
            r.std_err = rep.per_task[k].tv_se;
            rows.push_back(r);
            r.metric = "lp";
            r.value = rep.per_task[k].lp;
            r.std_err = rep.per_task[k].lp_se;
            rows.push_back(r);
        }
        ResultRow r = tmpl;
        r.metric = "scalarized_tv";
        r.value = rep.scalarized_tv;
        rows.push_back(r);
        r.metric = "scalarized_lp";
        r.value = rep.scalarized_lp;
        rows.push_back(r);
    }

private:
    std::string mode_;
    std::uint64_t seed_;
};

struct Outputs {
    std::vector<ResultRow> rows;
    std::vector<TimingRow> timings;
    std::vector<std::string> checkpoints;
    std::vector<std::string> pseudo_files;
    std::vector<std::string> warnings;
    json extra = json::object();
};

using clock_type = std::chrono::steady_clock;

double since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

void save_model(const ScoreModel& m, const fs::path& dir, const std::string& id, const ExperimentConfig& cfg,
                Outputs& out) {
    if (!cfg.save_checkpoints) return;
    fs::create_directories(dir / "checkpoints");
    save_checkpoint(m, dir / "checkpoints" / (id + ".ckpt"), id);
    out.checkpoints.push_back("checkpoints/" + id + ".ckpt");
}

void save_pseudo(const PseudoDataset& p, const fs::path& dir, const std::string& id, const ExperimentConfig& cfg,
                 Outputs& out) {
    if (!cfg.save_pseudo) return;
    fs::create_directories(dir / "pseudo");
    write_pseudo_csv(p, (dir / "pseudo" / (id + ".csv")).string());
    out.pseudo_files.push_back("pseudo/" + id + ".csv");
}

void run_distribution(const ExperimentConfig& cfg, const fs::path& dir, Outputs& out) {
    for (const auto seed : cfg.seeds) {
        const auto t0 = clock_type::now();
        PipelineConfig p = cfg.pipeline;
        p.seed = seed;
        const PipelineResult res = run_pipeline(p);
        const Recorder rec("distribution", seed);
        const std::string n = std::to_string(p.n_labeled), N = std::to_string(p.n_pseudo);
        const std::string sid = "seed" + std::to_string(seed);

        for (std::size_t k = 0; k < res.specialists.size(); ++k) {
            save_model(res.specialists[k], dir, sid + "_specialist" + std::to_string(k), cfg, out);
            save_pseudo(res.pseudo[k], dir, sid + "_task" + std::to_string(k), cfg, out);
            ResultRow r = rec.base("specialist");
            r.n = n;
            r.N = N;
            r.task = std::to_string(k);
            r.metric = "acceptance_rate";
            r.value = res.pseudo[k].provenance.acceptance_rate();
            out.rows.push_back(r);
            r.metric = "clipped";
            r.value = static_cast<double>(res.pseudo[k].provenance.clipped);
            out.rows.push_back(r);
            if (res.specialist_report) {
                const auto& m = res.specialist_report->per_task[k];
                r.metric = "tv";
                r.value = m.tv;
                r.std_err = m.tv_se;
                out.rows.push_back(r);
                r.metric = "lp";
                r.value = m.lp;
                r.std_err = m.lp_se;
                out.rows.push_back(r);
            }
        }
        ResultRow g = rec.base("semi");
        g.n = n;
        g.N = N;
        g.scalarization = p.scalarization.id();
        rec.report(out.rows, g, res.generalist_report);
        save_model(*res.generalist, dir, sid + "_generalist", cfg, out);
        if (res.baseline) {
            ResultRow b = rec.base("labeled");
            b.n = n;
            b.scalarization = p.scalarization.id();
            rec.report(out.rows, b, *res.baseline_report);
            save_model(*res.baseline, dir, sid + "_baseline", cfg, out);
        }
        for (const auto& w : res.warnings) out.warnings.push_back(sid + ": " + w);
        out.timings.push_back({seed, "pipeline", since(t0)});
    }
}

void run_sweep(const ExperimentConfig& cfg, Outputs& out) {
    for (const auto seed : cfg.seeds) {
        const auto rows = complexity_sweep(cfg.pipeline, cfg.sweep.n_grid, cfg.sweep.N_grid, {seed}, cfg.sweep.baseline);
        const Recorder rec("sweep", seed);
        for (const auto& row : rows) {
            ResultRow r = rec.base(row.method);
            r.n = std::to_string(row.n);
            r.N = row.method == "semi" ? std::to_string(row.N) : "";
            r.scalarization = row.scalarization;
            rec.report(out.rows, r, row.report);
            out.timings.push_back({seed, row.method + " n=" + r.n + " N=" + r.N, row.runtime_s});
        }
    }
}

void run_pareto(const ExperimentConfig& cfg, Outputs& out) {
    const auto t0 = clock_type::now();
    const ParetoFront front = pareto_sweep(cfg.pipeline, cfg.pareto.lambdas, cfg.seeds);
    for (std::size_t s = 0; s < front.seeds.size(); ++s) {
        const Recorder rec("pareto", front.seeds[s]);
        for (const auto& p : front.per_seed[s]) {
            ResultRow r = rec.base("semi");
            r.n = std::to_string(cfg.pipeline.n_labeled);
            r.N = std::to_string(cfg.pipeline.n_pseudo);
            r.lambda = lambda_str(p.lambda);
            r.scalarization = p.label;
            for (Eigen::Index k = 0; k < p.tv.size(); ++k) {
                ResultRow t = r;
                t.task = std::to_string(k);
                t.metric = "tv";
                t.value = p.tv(k);
                t.std_err = p.tv_se(k);
                out.rows.push_back(t);
                t.metric = "lp";
                t.value = p.lp(k);
                t.std_err = p.lp_se(k);
                out.rows.push_back(t);
            }
            r.metric = "dominated";
            r.value = p.dominated ? 1.0 : 0.0;
            out.rows.push_back(r);
        }
    }
    json pts = json::array();
    for (const auto& p : front.points) {
        json tv = json::array(), se = json::array();
        for (Eigen::Index k = 0; k < p.tv.size(); ++k) {
            tv.push_back(p.tv(k));
            se.push_back(p.tv_se(k));
        }
        pts.push_back({{"lambda", lambda_str(p.lambda)}, {"tv", tv}, {"tv_se", se}, {"dominated", p.dominated}});
    }
    out.extra["pareto_front"] = pts;
    out.timings.push_back({0, "pareto", since(t0)});
}

void run_mdp(const ExperimentConfig& cfg, const fs::path& dir, Outputs& out) {
    for (const auto seed : cfg.seeds) {
        const auto t0 = clock_type::now();
        MdpPipelineConfig m = cfg.mdp;
        m.seed = seed;
        const MdpResult res = run_mdp_pipeline(m);
        const Recorder rec("mdp", seed);
        const std::string n = std::to_string(m.n_labeled), N = std::to_string(m.n_pseudo);
        const std::string sid = "seed" + std::to_string(seed);
        auto gaps = [&](const std::string& method, const std::vector<GapEstimate>& gs, const std::string& NN) {
            for (std::size_t k = 0; k < gs.size(); ++k) {
                ResultRow r = rec.base(method);
                r.n = n;
                r.N = NN;
                r.task = std::to_string(k);
                r.metric = "gap";
                r.value = gs[k].gap;
                r.std_err = gs[k].std_err;
                out.rows.push_back(r);
                r.metric = "value_expert";
                r.value = gs[k].expert.value;
                r.std_err = gs[k].expert.std_err;
                out.rows.push_back(r);
                r.metric = "value_learned";
                r.value = gs[k].learned.value;
                r.std_err = gs[k].learned.std_err;
                out.rows.push_back(r);
            }
        };
        gaps("specialist", res.specialist_gaps, N);
        gaps("semi", res.generalist_gaps, N);
        ResultRow s = rec.base("semi");
        s.n = n;
        s.N = N;
        s.scalarization = m.scalarization.id();
        s.metric = "scalarized_gap";
        s.value = res.scalarized_gap;
        out.rows.push_back(s);
        if (res.baseline_scalarized_gap) {
            gaps("labeled", res.baseline_gaps, "");
            ResultRow b = rec.base("labeled");
            b.n = n;
            b.scalarization = m.scalarization.id();
            b.metric = "scalarized_gap";
            b.value = *res.baseline_scalarized_gap;
            out.rows.push_back(b);
        }
        // Performance-difference check for the generalist on each env.
        const SamplerConfig sampler = m.as_pipeline({}).resolved_pseudo_sampler();
        for (std::size_t k = 0; k < m.envs.size(); ++k) {
            const MdpEnv env = make_env(m.envs[k]);
            const PerformanceDifference pd =
                performance_difference_check(env, make_expert(m.envs[k]), diffusion_policy(res.generalist->field(), sampler),
                                             m.n_rollouts, 10, 2000, derive_seed(seed, {11, k}));
            ResultRow r = rec.base("semi");
            r.n = n;
            r.N = N;
            r.task = std::to_string(k);
            r.metric = "pd_gap";
            r.value = pd.gap.gap;
            r.std_err = pd.gap.std_err;
            out.rows.push_back(r);
            r.metric = "pd_bound";
            r.value = pd.bound;
            r.std_err = pd.margin / 3.0;
            out.rows.push_back(r);
        }
        ResultRow v = rec.base("semi");
        v.metric = "reward_violations";
        v.value = static_cast<double>(res.reward_violations);
        out.rows.push_back(v);
        v.metric = "clip_events";
        v.value = static_cast<double>(res.clip_events);
        out.rows.push_back(v);

        for (std::size_t k = 0; k < res.specialists.size(); ++k) {
            save_model(res.specialists[k], dir, sid + "_specialist" + std::to_string(k), cfg, out);
            save_pseudo(res.pseudo[k], dir, sid + "_env" + std::to_string(k), cfg, out);
        }
        save_model(*res.generalist, dir, sid + "_generalist", cfg, out);
        if (res.baseline) save_model(*res.baseline, dir, sid + "_baseline", cfg, out);
        for (const auto& w : res.warnings) out.warnings.push_back(sid + ": " + w);
        out.timings.push_back({seed, "mdp_pipeline", since(t0)});
    }
}

std::vector<Scalarization> axiom_kinds(const ExperimentConfig& cfg) {
    if (!cfg.axioms.kinds.empty()) return cfg.axioms.kinds;
    const int k = cfg.axioms.k;
    return {Scalarization::linear(Vec::Constant(k, 1.0 / k)), Scalarization::chebyshev(), Scalarization::lp(1.0),
            Scalarization::lp(2.0), Scalarization::lp(std::numeric_limits<double>::infinity())};
}

void run_axioms(const ExperimentConfig& cfg, Outputs& out) {
    for (const auto seed : cfg.seeds) {
        const Recorder rec("axioms", seed);
        for (const auto& s : axiom_kinds(cfg)) {
            Rng rng = make_rng(seed, {0xa5});
            const AxiomReport rep = check_axioms(s, cfg.axioms.k, cfg.axioms.n_samples, rng);
            ResultRow r = rec.base(s.id());
            r.scalarization = s.id();
            for (const auto& [metric, value] :
                 std::vector<std::pair<std::string, bool>>{{"homogeneity", rep.homogeneity},
                                                           {"reverse_triangle", rep.reverse_triangle},
                                                           {"square_property_checked", rep.square_property_checked},
                                                           {"square_property", rep.square_property},
                                                           {"passed", rep.passed()}}) {
                r.metric = metric;
                r.value = value ? 1.0 : 0.0;
                out.rows.push_back(r);
            }
        }
    }
}

std::string timings_csv(const std::vector<TimingRow>& rows) {
    std::string s = "seed,cell,seconds\n";
    for (const auto& t : rows) s += std::to_string(t.seed) + "," + t.cell + "," + short_num(t.seconds) + "\n";
    return s;
}

double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

std::string artifact_version() {
    const std::string rev = SEMIDIFF_GIT_REV;
    return rev.empty() ? std::string(SEMIDIFF_VERSION) : std::string(SEMIDIFF_VERSION) + "+g" + rev;
}

fs::path resolve_output_dir(const ExperimentConfig& cfg, const std::string& cli_out) {
    if (!cli_out.empty()) return cli_out;
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    const char* root = std::getenv("SEMIDIFF_OUT_ROOT");
    const fs::path base = root && *root ? fs::path(root) : fs::path("runs");
    return base / (cfg.name + "-" + config_hash(cfg).substr(0, 8));
}

void apply_overrides(ExperimentConfig& cfg, std::optional<std::uint64_t> seed_override, std::optional<int> workers) {
    if (seed_override) {
        cfg.seeds = {*seed_override};
        cfg.pipeline.seed = *seed_override;
        cfg.mdp.seed = *seed_override;
    }
    if (workers) {
        if (*workers < 1) throw ConfigError("workers must be positive");
        cfg.pipeline.workers = *workers;
        cfg.mdp.workers = *workers;
    }
}

std::string describe_plan(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "mode: " << to_string(cfg.mode) << "\n"
       << "config_hash: " << config_hash(cfg) << "\n"
       << "version: " << artifact_version() << "\n"
       << "seeds: " << cfg.seeds.size() << "\n";
    const auto& p = cfg.pipeline;
    switch (cfg.mode) {
        case Mode::distribution:
            os << "jobs: " << cfg.seeds.size() << " pipeline runs (K=" << p.tasks.size() << ", n=" << p.n_labeled
               << ", N=" << p.n_pseudo << ", S=" << p.scalarization.id() << ", baseline=" << p.run_baseline << ")\n";
            break;
        case Mode::sweep:
            os << "jobs: " << cfg.sweep.n_grid.size() * cfg.sweep.N_grid.size() * cfg.seeds.size()
               << " semi-supervised cells";
            if (cfg.sweep.baseline) os << " + " << cfg.sweep.n_grid.size() * cfg.seeds.size() << " baseline cells";
            os << "\n";
            break;
        case Mode::pareto:
            os << "jobs: " << cfg.pareto.lambdas.size() * cfg.seeds.size() << " generalists over "
               << cfg.pareto.lambdas.size() << " lambdas\n";
            break;
        case Mode::mdp:
            os << "jobs: " << cfg.seeds.size() << " MDP pipeline runs (K=" << cfg.mdp.envs.size()
               << ", n=" << cfg.mdp.n_labeled << ", N=" << cfg.mdp.n_pseudo << ")\n";
            break;
        case Mode::axioms:
            os << "jobs: " << axiom_kinds(cfg).size() * cfg.seeds.size() << " axiom checks on "
               << cfg.axioms.n_samples << " samples\n";
            break;
    }
    os << "specialist capacity: " << capacity_report(p.specialist) << "\n"
       << "generalist capacity: " << capacity_report(p.generalist) << "\n"
       << "resolved config:\n"
       << to_json(cfg).dump(2) << "\n";
    return os.str();
}

void write_results_csv(const std::vector<ResultRow>& rows, const std::string& hash, const fs::path& path) {
    std::ostringstream os;
    os << kResultsHeader << "\n";
    const std::string version = artifact_version();
    for (const auto& r : rows)
        os << r.mode << "," << r.method << "," << r.seed << "," << r.n << "," << r.N << "," << r.lambda << ","
           << r.scalarization << "," << r.task << "," << r.metric << "," << num(r.value) << "," << num(r.std_err)
           << "," << hash << "," << version << "\n";
    write_file(path, os.str());
}

std::vector<ResultRow> read_results_csv(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line) || line != kResultsHeader)
        throw std::runtime_error(path.string() + ": missing or unexpected header");
    std::vector<ResultRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 13) throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected 13 fields");
        ResultRow r;
        r.mode = f[0];
        r.method = f[1];
        r.seed = std::stoull(f[2]);
        r.n = f[3];
        r.N = f[4];
        r.lambda = f[5];
        r.scalarization = f[6];
        r.task = f[7];
        r.metric = f[8];
        r.value = std::stod(f[9]);
        r.std_err = std::stod(f[10]);
        rows.push_back(std::move(r));
    }
    return rows;
}

RunSummary run_experiment(const ExperimentConfig& cfg, const fs::path& dir) {
    RunSummary summary;
    summary.dir = dir;
    summary.warnings = cfg.validate();
    fs::create_directories(dir);
    const std::string hash = config_hash(cfg);

    json manifest = {{"version", artifact_version()},
                     {"config_hash", hash},
                     {"mode", to_string(cfg.mode)},
                     {"seeds", cfg.seeds},
                     {"status", "running"},
                     {"config", to_json(cfg)}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");

    Outputs out;
    switch (cfg.mode) {
        case Mode::distribution: run_distribution(cfg, dir, out); break;
        case Mode::sweep: run_sweep(cfg, out); break;
        case Mode::pareto: run_pareto(cfg, out); break;
        case Mode::mdp: run_mdp(cfg, dir, out); break;
        case Mode::axioms: run_axioms(cfg, out); break;
    }
    write_results_csv(out.rows, hash, dir / "results.csv");
    write_file(dir / "timings.csv", timings_csv(out.timings));

    summary.warnings.insert(summary.warnings.end(), out.warnings.begin(), out.warnings.end());
    manifest["status"] = "complete";
    manifest["warnings"] = summary.warnings;
    manifest["files"] = {{"results", "results.csv"}, {"timings", "timings.csv"}};
    manifest["checkpoints"] = out.checkpoints;
    manifest["pseudo"] = out.pseudo_files;
    for (auto it = out.extra.begin(); it != out.extra.end(); ++it) manifest[it.key()] = it.value();
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    summary.rows = out.rows.size();
    return summary;
}

ReportSummary write_report(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw std::runtime_error("report: not a directory: " + dir.string());
    if (!fs::exists(dir / "results.csv")) throw std::runtime_error("report: no results.csv in " + dir.string());
    const auto rows = read_results_csv(dir / "results.csv");
    if (rows.empty()) throw std::runtime_error("report: results.csv has no rows");

    std::size_t expected = 0;
    std::string hash, version, status = "unknown";
    if (fs::exists(dir / "manifest.json")) {
        const json m = json::parse(read_file(dir / "manifest.json"));
        expected = m.value("seeds", json::array()).size();
        hash = m.value("config_hash", "");
        version = m.value("version", "");
        status = m.value("status", "unknown");
    }

    using Key = std::tuple<std::string, std::string, std::string, std::string, std::string, std::string, std::string,
                           std::string>;
    std::map<Key, std::vector<double>> cells;
    for (const auto& r : rows)
        cells[{r.mode, r.method, r.n, r.N, r.lambda, r.scalarization, r.task, r.metric}].push_back(r.value);

    ReportSummary rs;
    std::ostringstream csv, md;
    csv << "mode,method,n,N,lambda,scalarization,task,metric,n_seeds,expected_seeds,complete,median,q1,q3,mean,std_err\n";
    md << "# Results report\n\n"
       << "- config hash: `" << hash << "`\n"
       << "- version: `" << version << "`\n"
       << "- run status: " << status << "\n"
       << "- seeds expected per cell: " << expected << "\n\n";

    std::map<std::string, std::vector<std::string>> tables;  // metric -> markdown rows
    std::vector<std::string> flagged;
    for (const auto& [key, values] : cells) {
        const auto& [mode, method, n, N, lambda, scal, task, metric] = key;
        const double med = quantile(values, 0.5), q1 = quantile(values, 0.25), q3 = quantile(values, 0.75);
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        const double se =
            values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()))
                              : 0.0;
        const bool complete = expected == 0 || values.size() == expected;
        ++rs.cells;
        if (!complete) {
            ++rs.incomplete;
            flagged.push_back(mode + "/" + method + " n=" + n + " N=" + N + " lambda=" + lambda + " task=" + task + " " +
                              metric + ": " + std::to_string(values.size()) + " of " + std::to_string(expected) +
                              " seeds");
        }
        csv << mode << "," << method << "," << n << "," << N << "," << lambda << "," << scal << "," << task << ","
            << metric << "," << values.size() << "," << expected << "," << (complete ? "true" : "false") << ","
            << num(med) << "," << num(q1) << "," << num(q3) << "," << num(mean) << "," << num(se) << "\n";
        tables[metric].push_back("| " + method + " | " + (n.empty() ? "-" : n) + " | " + (N.empty() ? "-" : N) + " | " +
                                 (lambda.empty() ? "-" : lambda) + " | " + (task.empty() ? "all" : task) + " | " +
                                 short_num(med) + " | [" + short_num(q1) + ", " + short_num(q3) + "] | " +
                                 std::to_string(values.size()) + " |");
    }

    for (const auto& [metric, lines] : tables) {
        md << "## " << metric << "\n\n"
           << "| method | n | N | lambda | task | median | IQR | seeds |\n"
           << "|---|---|---|---|---|---|---|---|\n";
        for (const auto& l : lines) md << l << "\n";
        md << "\n";
    }
    md << "## Incomplete cells\n\n";
    if (flagged.empty()) md << "none\n";
    for (const auto& f : flagged) md << "- " << f << "\n";

    write_file(dir / "report.csv", csv.str());
    write_file(dir / "report.md", md.str());
    return rs;
}

}  // namespace semidiff

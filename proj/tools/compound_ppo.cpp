// Experiment runner for the compound-action PPO lab: train / sweep / eval.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "cppo/cppo.hpp"

namespace fs = std::filesystem;
using namespace cppo;

namespace {

constexpr const char* kBuildId = "compound-ppo 0.1.0";

std::string output_root(const std::string& out_dir_flag) {
    if (!out_dir_flag.empty()) return out_dir_flag;
    if (const char* env = std::getenv("COMPOUND_PPO_OUT")) return env;
    return "runs";
}

std::string timestamp_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", std::gmtime(&t));
    return buf;
}

std::string fmt_eps(double eps) {
    if (eps <= 0.0 || !std::isfinite(eps)) return "noclip";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", eps);
    return buf;
}

std::string make_run_dir(const std::string& root, const TrainConfig& cfg) {
    const std::string base = cfg.env + "_" + cfg.loss + "_eps" + fmt_eps(cfg.clip_eps) +
                             "_seed" + std::to_string(cfg.seed);
    std::string dir = root + "/" + base;
    for (int i = 1; fs::exists(dir); ++i) dir = root + "/" + base + "_" + std::to_string(i);
    fs::create_directories(dir);
    return dir;
}

void write_manifest(const std::string& run_dir, const TrainConfig& cfg,
                    const std::string& started, const std::string& ended = "") {
    std::ofstream out(run_dir + "/manifest.txt");
    out << "build = " << kBuildId << "\n";
    out << "checkpoint_format_version = " << kCheckpointFormatVersion << "\n";
    out << "frame_format_version = " << kFrameFormatVersion << "\n";
    out << "started = " << started << "\n";
    if (!ended.empty()) out << "ended = " << ended << "\n";
    out << "--- config ---\n" << config_to_text(cfg);
}

struct RunSummary {
    std::string dir;
    bool ok = false;
    std::string error;
    double final_return = 0.0;
    double unclipped_fraction = 0.0;
};

RunSummary run_one(TrainConfig cfg, const std::string& root) {
    RunSummary s;
    try {
        cfg.validate();
        s.dir = make_run_dir(root, cfg);
        cfg.out_dir = s.dir;
        const std::string started = timestamp_now();
        write_manifest(s.dir, cfg, started);
        {
            std::ofstream snap(s.dir + "/config.snapshot");
            snap << config_to_text(cfg);
        }
        MetricsWriter metrics(s.dir + "/metrics.csv");
        TrainResult result;
        if (cfg.mode == "async") {
            AsyncResult ar = async_train(cfg, &metrics, s.dir);
            result = std::move(ar.train);
            // staleness histogram
            std::map<std::uint64_t, std::uint64_t> hist;
            for (auto v : ar.staleness) ++hist[v];
            std::cout << "staleness histogram (version lag: updates):";
            for (const auto& [k, v] : hist) std::cout << " " << k << ":" << v;
            std::cout << "\nqueue: produced=" << ar.queue.produced
                      << " consumed=" << ar.queue.consumed << " dropped=" << ar.queue.dropped
                      << " in_queue=" << ar.queue.in_queue
                      << " torn_reads=" << ar.torn_reads << "\n";
        } else {
            result = serial_train(cfg, &metrics, s.dir);
        }
        write_manifest(s.dir, cfg, started, timestamp_now());
        if (result.aborted) {
            s.error = "aborted: " + result.abort_reason;
            return s;
        }
        std::uint64_t unclipped = 0, total = 0;
        for (const auto& row : result.rows) {
            unclipped += row.unclipped_samples;
            total += row.total_samples;
        }
        s.final_return = result.rows.empty() ? 0.0 : result.rows.back().mean_ep_return;
        s.unclipped_fraction = total ? static_cast<double>(unclipped) / total : 0.0;
        s.ok = true;
    } catch (const std::exception& ex) {
        s.error = ex.what();
    }
    return s;
}

void add_train_flags(CLI::App* cmd, TrainConfig& cfg, std::string& preset,
                     std::string& config_path, std::string& out_dir) {
    cmd->add_option("--config", config_path, "load a config.snapshot (other flags override)");
    cmd->add_option("--preset", preset, "hyperparameter preset: mujoco-analogue | urts-analogue");
    cmd->add_option("--env", cfg.env, "environment: gridharvest | chainreach");
    cmd->add_option("--loss", cfg.loss, "loss: compound | sub-action | mix-ratio | mix-loss");
    cmd->add_option("--w", cfg.w, "mix weight in [0,1]");
    cmd->add_option("--clip-eps", cfg.clip_eps, "clip epsilon (<=0 disables clipping)");
    cmd->add_option("--gamma", cfg.gamma, "discount factor");
    cmd->add_option("--lam", cfg.lam, "GAE lambda");
    cmd->add_option("--lr", cfg.lr, "learning rate");
    cmd->add_option("--c1", cfg.c1, "value loss coefficient");
    cmd->add_option("--c2", cfg.c2, "entropy coefficient");
    cmd->add_option("--steps", cfg.total_steps, "total environment steps");
    cmd->add_option("--rollout-len", cfg.rollout_len, "rollout length per env");
    cmd->add_option("--num-envs", cfg.num_envs, "parallel envs (serial mode)");
    cmd->add_option("--minibatch", cfg.minibatch, "minibatch size");
    cmd->add_option("--epochs", cfg.epochs, "epochs per update");
    cmd->add_option("--seed", cfg.seed, "random seed");
    cmd->add_option("--mode", cfg.mode, "serial | async");
    cmd->add_option("--samplers", cfg.samplers, "sampler count (async)");
    cmd->add_option("--trainers", cfg.trainers, "trainer count (async)");
    cmd->add_option("--out-dir", out_dir, "output root (default $COMPOUND_PPO_OUT or ./runs)");
}

// applies --config and --preset before the explicit flag values
TrainConfig resolve_config(CLI::App* cmd, const TrainConfig& flag_cfg,
                           const std::string& preset, const std::string& config_path) {
    TrainConfig cfg;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw std::runtime_error("cannot read config: " + config_path);
        std::stringstream ss;
        ss << in.rdbuf();
        cfg = config_from_text(ss.str());
    }
    if (!preset.empty()) apply_preset(cfg, preset);
    // explicit flags win
    auto seen = [&](const char* name) { return cmd->count(name) > 0; };
    if (seen("--env")) cfg.env = flag_cfg.env;
    if (seen("--loss")) cfg.loss = flag_cfg.loss;
    if (seen("--w")) cfg.w = flag_cfg.w;
    if (seen("--clip-eps")) cfg.clip_eps = flag_cfg.clip_eps;
    if (seen("--gamma")) cfg.gamma = flag_cfg.gamma;
    if (seen("--lam")) cfg.lam = flag_cfg.lam;
    if (seen("--lr")) cfg.lr = flag_cfg.lr;
    if (seen("--c1")) cfg.c1 = flag_cfg.c1;
    if (seen("--c2")) cfg.c2 = flag_cfg.c2;
    if (seen("--steps")) cfg.total_steps = flag_cfg.total_steps;
    if (seen("--rollout-len")) cfg.rollout_len = flag_cfg.rollout_len;
    if (seen("--num-envs")) cfg.num_envs = flag_cfg.num_envs;
    if (seen("--minibatch")) cfg.minibatch = flag_cfg.minibatch;
    if (seen("--epochs")) cfg.epochs = flag_cfg.epochs;
    if (seen("--seed")) cfg.seed = flag_cfg.seed;
    if (seen("--mode")) cfg.mode = flag_cfg.mode;
    if (seen("--samplers")) cfg.samplers = flag_cfg.samplers;
    if (seen("--trainers")) cfg.trainers = flag_cfg.trainers;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compound-action PPO laboratory"};
    app.require_subcommand(1);

    // ---- train ----
    auto* train = app.add_subcommand("train", "run one training job");
    TrainConfig train_cfg;
    std::string train_preset, train_config, train_out;
    add_train_flags(train, train_cfg, train_preset, train_config, train_out);

    // ---- sweep ----
    auto* sweep = app.add_subcommand("sweep", "clip-coefficient x loss-variant sweep");
    TrainConfig sweep_cfg;
    std::string sweep_preset, sweep_config, sweep_out;
    add_train_flags(sweep, sweep_cfg, sweep_preset, sweep_config, sweep_out);
    std::vector<double> sweep_eps{0.1, 0.2, 0.3, 0.5};
    std::vector<std::string> sweep_losses{"compound", "sub-action", "mix-ratio", "mix-loss"};
    bool include_noclip = false;
    std::size_t jobs = 1;
    sweep->add_option("--eps-list", sweep_eps, "clip epsilons to sweep")->delimiter(',');
    sweep->add_option("--losses", sweep_losses, "loss variants to sweep")->delimiter(',');
    sweep->add_flag("--include-noclip", include_noclip, "add a clipping-disabled run");
    sweep->add_option("--jobs", jobs, "bounded parallelism for sweep runs");

    // ---- eval ----
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    std::string ckpt_path;
    std::size_t episodes = 100;
    std::uint64_t eval_seed = 0;
    eval->add_option("checkpoint", ckpt_path, "checkpoint path")->required();
    eval->add_option("--episodes", episodes, "episodes to evaluate (default 100)");
    eval->add_option("--seed", eval_seed, "evaluation seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            TrainConfig cfg = resolve_config(train, train_cfg, train_preset, train_config);
            cfg.validate();
            RunSummary s = run_one(cfg, output_root(train_out));
            if (!s.ok) {
                std::cerr << "run failed: " << s.error << "\n";
                return 1;
            }
            std::cout << "run dir: " << s.dir << "\n";
            std::cout << "final mean episode return: " << s.final_return << "\n";
            std::cout << "unclipped sample fraction: " << s.unclipped_fraction << "\n";
            return 0;
        }
        if (*sweep) {
            TrainConfig base = resolve_config(sweep, sweep_cfg, sweep_preset, sweep_config);
            std::vector<TrainConfig> plan;
            std::vector<double> eps_values = sweep_eps;
            if (include_noclip) eps_values.push_back(0.0); // 0 = clipping disabled
            for (const auto& loss : sweep_losses) {
                LossVariant::parse(loss); // validate early
                for (double e : eps_values) {
                    TrainConfig c = base;
                    c.loss = loss;
                    c.clip_eps = e;
                    plan.push_back(c);
                }
            }
            const std::string root = output_root(sweep_out);
            std::vector<RunSummary> summaries(plan.size());
            std::atomic<std::size_t> next{0};
            auto worker = [&] {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= plan.size()) break;
                    summaries[i] = run_one(plan[i], root);
                }
            };
            std::vector<std::thread> pool;
            for (std::size_t j = 0; j < std::max<std::size_t>(1, jobs); ++j)
                pool.emplace_back(worker);
            for (auto& t : pool) t.join();

            bool any_failed = false;
            std::cout << "loss,eps,run_dir,final_return,unclipped_fraction,status\n";
            for (std::size_t i = 0; i < plan.size(); ++i) {
                const auto& s = summaries[i];
                std::cout << plan[i].loss << "," << fmt_eps(plan[i].clip_eps) << "," << s.dir
                          << "," << s.final_return << "," << s.unclipped_fraction << ","
                          << (s.ok ? "ok" : ("FAILED: " + s.error)) << "\n";
                if (!s.ok) any_failed = true;
            }
            return any_failed ? 1 : 0;
        }
        if (*eval) {
            Checkpoint ck = load_checkpoint(ckpt_path);
            auto env = env_from_checkpoint(ck);
            EvalResult r = evaluate(ck, *env, episodes, eval_seed);
            std::cout << "episodes: " << episodes << "\n";
            std::cout << "mean return: " << r.mean << "\n";
            std::cout << "95% CI: [" << r.mean - r.ci95 << ", " << r.mean + r.ci95 << "]\n";
            return 0;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}

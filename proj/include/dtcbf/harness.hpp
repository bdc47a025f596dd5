#pragma once

// Episode runner: drives an environment (optionally shielded) with a
// built-in policy and writes per-step and per-episode CSV files.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dtcbf/car_env.hpp"
#include "dtcbf/errors.hpp"
#include "dtcbf/fw_env.hpp"
#include "dtcbf/policies.hpp"
#include "dtcbf/rng.hpp"
#include "dtcbf/shielded_env.hpp"

namespace dtcbf {

inline constexpr std::string_view kStepsSchema = "dtcbf-steps/1";
inline constexpr std::string_view kSummarySchema = "dtcbf-summary/1";

struct RunOptions {
    std::string env = "car";  // "fw" or "car"
    std::string policy = "random";
    FilterMode filter = FilterMode::none;
    std::size_t episodes = 10;
    std::uint64_t seed = 0;
    std::string out_dir;  // empty: no files
    std::size_t segments = 32;
    unsigned threads = 0;  // 0: hardware concurrency
    ParamSet params;
};

struct EpisodeSummary {
    std::size_t episode = 0;
    std::uint64_t seed = 0;
    std::size_t steps = 0;
    double total_reward = 0.0;
    double total_cost = 0.0;
    bool unsafe = false;
    DoneReason done_reason = DoneReason::none;
    std::size_t filtered_steps = 0;  // steps that went through a filter
    std::size_t nominal_passed = 0;
    std::size_t overrides = 0;
    double override_distance_sum = 0.0;
};

struct RunSummary {
    std::size_t episodes = 0;
    std::size_t total_steps = 0;
    double mean_reward = 0.0;
    double mean_cost = 0.0;
    double total_cost = 0.0;
    std::size_t unsafe_episodes = 0;
    double mean_override_distance = 0.0;  // over steps where the nominal was replaced
    std::vector<double> action_std;       // per action component, applied actions
    double nominal_pass_percent = 100.0;
};

namespace detail {

inline std::string fmt(double v)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

struct EpisodeOutput {
    EpisodeSummary summary;
    std::string rows;  // CSV rows for steps.csv, only when writing files
    std::vector<double> action_sum;
    std::vector<double> action_sumsq;
};

template <class Env>
EpisodeOutput run_episode(const RunOptions& opt, std::size_t episode, std::uint64_t episode_seed)
{
    Env base(opt.params);
    auto env = wrap_with_filter(std::move(base), opt.filter, opt.segments);
    const auto policy = make_policy<Env>(opt.policy);
    RngStream rng(episode_seed, 2);
    EpisodeOutput out;
    out.summary.episode = episode;
    out.summary.seed = episode_seed;
    env.reset(episode_seed);
    std::ostringstream rows;
    for (std::size_t t = 0; !env.done(); ++t) {
        const auto nominal = policy(env.env(), rng);
        const auto r = env.step(nominal);
        EpisodeSummary& s = out.summary;
        ++s.steps;
        s.total_reward += r.reward;
        s.total_cost += r.cost;
        s.unsafe = s.unsafe || r.cost > 0;
        s.done_reason = r.done_reason;
        std::string mode = "none";
        double dist = 0.0;
        double frac = 0.0;
        if (r.info.decision) {
            ++s.filtered_steps;
            mode = std::string(to_string(r.info.decision->branch));
            dist = r.info.decision->override_distance;
            frac = r.info.decision->line_fraction;
            if (r.info.decision->branch == FilterBranch::nominal_passed) ++s.nominal_passed;
            else {
                ++s.overrides;
                s.override_distance_sum += dist;
            }
        }
        const auto applied = r.info.applied.to_array();
        out.action_sum.resize(applied.size(), 0.0);
        out.action_sumsq.resize(applied.size(), 0.0);
        for (std::size_t i = 0; i < applied.size(); ++i) {
            out.action_sum[i] += applied[i];
            out.action_sumsq[i] += applied[i] * applied[i];
        }
        if (opt.out_dir.empty()) continue;
        rows << episode << ',' << t;
        for (double x : r.info.state) rows << ',' << fmt(x);
        for (double x : nominal.to_array()) rows << ',' << fmt(x);
        for (double x : applied) rows << ',' << fmt(x);
        rows << ',' << fmt(r.reward) << ',' << r.cost << ',' << mode << ',' << fmt(dist) << ','
             << fmt(frac) << ',' << to_string(r.done_reason) << '\n';
    }
    out.rows = rows.str();
    return out;
}

template <class Env>
std::string steps_header()
{
    std::string h = "episode,t";
    for (const auto& n : Env::state_names()) h += "," + n;
    for (const auto& n : Env::control_names()) h += ",nominal_" + n;
    for (const auto& n : Env::control_names()) h += ",applied_" + n;
    return h + ",reward,cost,mode,override_distance,line_fraction,done_reason";
}

inline std::string summary_header()
{
    return "episode,seed,steps,total_reward,total_cost,unsafe,done_reason,filtered_steps,nominal_passed,"
           "overrides,override_distance_sum";
}

inline std::string summary_row(const EpisodeSummary& s)
{
    std::ostringstream o;
    o << s.episode << ',' << s.seed << ',' << s.steps << ',' << fmt(s.total_reward) << ','
      << fmt(s.total_cost) << ',' << (s.unsafe ? 1 : 0) << ',' << to_string(s.done_reason) << ','
      << s.filtered_steps << ',' << s.nominal_passed << ',' << s.overrides << ','
      << fmt(s.override_distance_sum);
    return o.str();
}

}  // namespace detail

/// Seed of episode e: first draw of stream e of the run seed.
inline std::uint64_t episode_seed(std::uint64_t run_seed, std::size_t episode)
{
    return RngStream(run_seed, episode).next_u64();
}

/// Reduction over episodes in episode order, so the result does not depend
/// on which worker ran which episode.
inline RunSummary aggregate(const std::vector<EpisodeSummary>& episodes,
                            const std::vector<std::vector<double>>& action_sums,
                            const std::vector<std::vector<double>>& action_sumsqs)
{
    RunSummary r;
    r.episodes = episodes.size();
    std::size_t filtered = 0, passed = 0, overrides = 0;
    double dist = 0.0;
    for (const auto& e : episodes) {
        r.total_steps += e.steps;
        r.mean_reward += e.total_reward;
        r.total_cost += e.total_cost;
        r.unsafe_episodes += e.unsafe ? 1 : 0;
        filtered += e.filtered_steps;
        passed += e.nominal_passed;
        overrides += e.overrides;
        dist += e.override_distance_sum;
    }
    if (r.episodes > 0) {
        r.mean_reward /= static_cast<double>(r.episodes);
        r.mean_cost = r.total_cost / static_cast<double>(r.episodes);
    }
    r.mean_override_distance = overrides > 0 ? dist / static_cast<double>(overrides) : 0.0;
    r.nominal_pass_percent =
        filtered > 0 ? 100.0 * static_cast<double>(passed) / static_cast<double>(filtered) : 100.0;
    std::vector<double> sum, sumsq;
    for (std::size_t e = 0; e < action_sums.size(); ++e) {
        sum.resize(std::max(sum.size(), action_sums[e].size()), 0.0);
        sumsq.resize(sum.size(), 0.0);
        for (std::size_t i = 0; i < action_sums[e].size(); ++i) {
            sum[i] += action_sums[e][i];
            sumsq[i] += action_sumsqs[e][i];
        }
    }
    if (r.total_steps > 0) {
        const double n = static_cast<double>(r.total_steps);
        for (std::size_t i = 0; i < sum.size(); ++i) {
            const double mean = sum[i] / n;
            r.action_std.push_back(std::sqrt(std::max(0.0, sumsq[i] / n - mean * mean)));
        }
    }
    return r;
}

template <class Env>
RunSummary run_env(const RunOptions& opt)
{
    make_policy<Env>(opt.policy);  // reject unknown names before any work
    std::vector<detail::EpisodeOutput> outputs(opt.episodes);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    const auto worker = [&] {
        for (;;) {
            const std::size_t e = next.fetch_add(1);
            if (e >= opt.episodes) return;
            try {
                outputs[e] = detail::run_episode<Env>(opt, e, episode_seed(opt.seed, e));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = opt.episodes;
            }
        }
    };
    unsigned n = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    n = static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(1, opt.episodes)));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);

    std::vector<EpisodeSummary> summaries;
    std::vector<std::vector<double>> sums, sumsqs;
    for (auto& o : outputs) {
        summaries.push_back(o.summary);
        sums.push_back(o.action_sum);
        sumsqs.push_back(o.action_sumsq);
    }
    if (!opt.out_dir.empty()) {
        std::filesystem::create_directories(opt.out_dir);
        const auto dir = std::filesystem::path(opt.out_dir);
        std::ofstream steps(dir / "steps.csv", std::ios::binary);
        std::ofstream summary(dir / "summary.csv", std::ios::binary);
        if (!steps || !summary) throw std::runtime_error("cannot write CSV files in " + opt.out_dir);
        steps << '#' << kStepsSchema << '\n' << detail::steps_header<Env>() << '\n';
        for (const auto& o : outputs) steps << o.rows;
        summary << '#' << kSummarySchema << '\n' << detail::summary_header() << '\n';
        for (const auto& s : summaries) summary << detail::summary_row(s) << '\n';
        if (!steps || !summary) throw std::runtime_error("I/O error writing CSV files in " + opt.out_dir);
    }
    return aggregate(summaries, sums, sumsqs);
}

inline RunSummary run(const RunOptions& opt)
{
    if (opt.env == "fw") return run_env<FwEnv>(opt);
    if (opt.env == "car") return run_env<CarEnv>(opt);
    throw ConfigError("unknown environment '" + opt.env + "' (expected fw or car)");
}

inline std::string format_summary(const RunSummary& r)
{
    std::ostringstream o;
    o << "episodes " << r.episodes << "\nsteps " << r.total_steps << "\nmean_reward "
      << detail::fmt(r.mean_reward) << "\nmean_cost " << detail::fmt(r.mean_cost) << "\ntotal_cost "
      << detail::fmt(r.total_cost) << "\nunsafe_episodes " << r.unsafe_episodes
      << "\nmean_override_distance " << detail::fmt(r.mean_override_distance) << "\naction_std";
    for (double s : r.action_std) o << ' ' << detail::fmt(s);
    o << "\nnominal_pass_percent " << detail::fmt(r.nominal_pass_percent) << '\n';
    return o.str();
}

}  // namespace dtcbf

#include "mfabc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace mfabc {

namespace fs = std::filesystem;

namespace {

void appendf(std::string& out, const char* fmt, ...)
{
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    out += buf;
}

struct GenerationMeta {
    double epsilon;
    double eta1;
    double eta2;
};

std::map<std::size_t, GenerationMeta> read_generation_meta(const fs::path& path)
{
    std::map<std::size_t, GenerationMeta> meta;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    if (line.rfind("generation,epsilon,eta1,eta2", 0) != 0) {
        throw std::runtime_error("malformed generation summary " + path.string());
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f[4];
        for (auto& s : f) {
            if (!std::getline(ss, s, ',')) throw std::runtime_error("malformed generation summary " + path.string());
        }
        try {
            meta[std::stoul(f[0])] = {std::stod(f[1]), std::stod(f[2]), std::stod(f[3])};
        } catch (const std::exception&) {
            throw std::runtime_error("malformed generation summary " + path.string());
        }
    }
    return meta;
}

struct Stat {
    double mean = 0.0;
    double sd = 0.0;
};

template <class F>
Stat stat(const std::vector<RunSummary>& runs, F f)
{
    Stat s;
    if (runs.empty()) return s;
    for (const auto& r : runs) s.mean += f(r);
    s.mean /= static_cast<double>(runs.size());
    if (runs.size() > 1) {
        for (const auto& r : runs) s.sd += (f(r) - s.mean) * (f(r) - s.mean);
        s.sd = std::sqrt(s.sd / static_cast<double>(runs.size() - 1));
    }
    return s;
}

}  // namespace

RunSummary summarize_caches(const std::vector<StoredGeneration>& stored, const std::string& label,
                            const fs::path& generations_csv)
{
    if (stored.empty()) throw std::runtime_error("run has no generations");
    std::map<std::size_t, GenerationMeta> meta;
    if (!generations_csv.empty()) meta = read_generation_meta(generations_csv);

    RunSummary run;
    run.label = label;
    double later_time = 0.0;
    std::size_t later_proposals = 0;
    for (std::size_t k = 0; k < stored.size(); ++k) {
        const auto& sg = stored[k];
        const WeightedSample sample = sg.cache.to_sample();
        GenerationSummary g;
        g.generation = sg.generation;
        if (auto it = meta.find(sg.generation); it != meta.end()) {
            g.epsilon = it->second.epsilon;
            g.eta1 = it->second.eta1;
            g.eta2 = it->second.eta2;
        }
        g.proposals = sg.cache.entries.size();
        g.high_fidelity = sg.cache.high_fidelity_count();
        g.ess = compute_ess(sample.weights());
        g.sim_time = sample.total_sim_time;
        g.time_per_proposal = g.proposals ? g.sim_time / static_cast<double>(g.proposals) : 0.0;
        g.efficiency = g.sim_time > 0.0 ? g.ess / g.sim_time : 0.0;
        g.posterior_mean = posterior_mean(sample);
        run.proposals += g.proposals;
        run.sim_time += g.sim_time;
        if (k > 0 || stored.size() == 1) {
            later_time += g.sim_time;
            later_proposals += g.proposals;
        }
        run.generations.push_back(std::move(g));
    }
    run.ess = run.generations.back().ess;
    run.efficiency = run.sim_time > 0.0 ? run.ess / run.sim_time : 0.0;
    run.later_time_per_proposal = later_proposals ? later_time / static_cast<double>(later_proposals) : 0.0;
    run.posterior_mean = run.generations.back().posterior_mean;
    return run;
}

RunSummary load_run(const fs::path& path)
{
    if (fs::is_regular_file(path)) return summarize_caches(read_cache_csv(path), path.string());
    if (!fs::is_directory(path)) throw std::runtime_error("no such run: " + path.string());

    static const std::regex pattern(R"(cache_gen_(\d+)\.csv)");
    std::vector<std::pair<std::size_t, fs::path>> files;
    for (const auto& entry : fs::directory_iterator(path)) {
        std::smatch m;
        const std::string name = entry.path().filename().string();
        if (std::regex_match(name, m, pattern)) files.emplace_back(std::stoul(m[1].str()), entry.path());
    }
    if (files.empty()) throw std::runtime_error("no cache files in " + path.string());
    std::sort(files.begin(), files.end());
    std::vector<StoredGeneration> stored;
    for (const auto& [_, file] : files) {
        for (auto& sg : read_cache_csv(file)) stored.push_back(std::move(sg));
    }
    const fs::path gens = path / "generations.csv";
    return summarize_caches(stored, path.string(), fs::exists(gens) ? gens : fs::path{});
}

std::vector<RunSummary> load_runs(const fs::path& path)
{
    std::vector<fs::path> reps;
    if (fs::is_directory(path)) {
        for (const auto& entry : fs::directory_iterator(path)) {
            if (entry.is_directory() && entry.path().filename().string().rfind("rep_", 0) == 0) {
                reps.push_back(entry.path());
            }
        }
    }
    std::sort(reps.begin(), reps.end());
    if (reps.empty()) return {load_run(path)};
    std::vector<RunSummary> runs;
    for (const auto& r : reps) runs.push_back(load_run(r));
    return runs;
}

std::string analyze_report(const std::vector<RunSummary>& runs)
{
    std::string out;
    for (const auto& run : runs) {
        appendf(out, "run %s\n", run.label.c_str());
        appendf(out, "%4s %10s %8s %8s %9s %9s %10s %12s %14s %12s\n", "gen", "epsilon", "eta1", "eta2",
                "proposals", "hi_sims", "ESS", "sim_time_s", "s/proposal", "ESS/s");
        for (const auto& g : run.generations) {
            const auto opt = [](const std::optional<double>& v) {
                char b[32];
                if (v) {
                    std::snprintf(b, sizeof b, "%.4g", *v);
                } else {
                    std::snprintf(b, sizeof b, "-");
                }
                return std::string(b);
            };
            appendf(out, "%4zu %10s %8s %8s %9zu %9zu %10.2f %12.4f %14.6g %12.4f\n", g.generation,
                    opt(g.epsilon).c_str(), opt(g.eta1).c_str(), opt(g.eta2).c_str(), g.proposals,
                    g.high_fidelity, g.ess, g.sim_time, g.time_per_proposal, g.efficiency);
        }
        appendf(out, "total: ESS %.2f, sim time %.4f s, efficiency %.4f ESS/s (%.2f ESS/min)\n", run.ess,
                run.sim_time, run.efficiency, 60.0 * run.efficiency);
        out += "posterior mean:";
        for (double m : run.posterior_mean) appendf(out, " %.6g", m);
        out += "\n\n";
    }
    if (runs.size() > 1) {
        const Stat ess = stat(runs, [](const RunSummary& r) { return r.ess; });
        const Stat time = stat(runs, [](const RunSummary& r) { return r.sim_time; });
        const Stat eff = stat(runs, [](const RunSummary& r) { return r.efficiency; });
        appendf(out, "over %zu runs: ESS %.2f (sd %.2f), sim time %.4f s (sd %.4f), efficiency %.4f ESS/s (sd %.4f)\n",
                runs.size(), ess.mean, ess.sd, time.mean, time.sd, eff.mean, eff.sd);
    }
    return out;
}

std::string compare_report(const std::vector<std::vector<RunSummary>>& groups,
                           const std::vector<std::string>& labels)
{
    if (groups.empty() || groups.size() != labels.size()) throw std::invalid_argument("need one label per group");
    std::string out;
    appendf(out, "%-24s %5s %12s %12s %12s %12s %14s %10s %10s %10s\n", "run", "n", "ESS", "sim_time_s",
            "ESS/s", "ESS/min", "s/proposal", "eff_ratio", "time_save", "prop_save");
    const auto& base = groups.front();
    const double base_eff = stat(base, [](const RunSummary& r) { return r.efficiency; }).mean;
    const double base_time = stat(base, [](const RunSummary& r) { return r.sim_time; }).mean;
    const double base_tpp = stat(base, [](const RunSummary& r) { return r.later_time_per_proposal; }).mean;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const auto& runs = groups[i];
        if (runs.empty()) throw std::invalid_argument("empty comparison group " + labels[i]);
        const Stat ess = stat(runs, [](const RunSummary& r) { return r.ess; });
        const Stat time = stat(runs, [](const RunSummary& r) { return r.sim_time; });
        const Stat eff = stat(runs, [](const RunSummary& r) { return r.efficiency; });
        const Stat tpp = stat(runs, [](const RunSummary& r) { return r.later_time_per_proposal; });
        appendf(out, "%-24s %5zu %12.2f %12.4f %12.4f %12.2f %14.6g %9.2fx %9.1f%% %9.1f%%\n",
                labels[i].c_str(), runs.size(), ess.mean, time.mean, eff.mean, 60.0 * eff.mean, tpp.mean,
                eff.mean / base_eff, 100.0 * (1.0 - time.mean / base_time), 100.0 * (1.0 - tpp.mean / base_tpp));
        if (runs.size() > 1) {
            appendf(out, "%-24s %5s %12.2f %12.4f %12.4f %12.2f %14.6g\n", "  (sd)", "", ess.sd, time.sd,
                    eff.sd, 60.0 * eff.sd, tpp.sd);
        }
    }
    out += "\nposterior means (sd over runs)\n";
    for (std::size_t i = 0; i < groups.size(); ++i) {
        appendf(out, "%-24s", labels[i].c_str());
        const std::size_t dim = groups[i].front().posterior_mean.size();
        for (std::size_t d = 0; d < dim; ++d) {
            const Stat m = stat(groups[i], [d](const RunSummary& r) { return r.posterior_mean.at(d); });
            appendf(out, " theta_%zu %.5g (%.3g)", d + 1, m.mean, m.sd);
        }
        out += "\n";
    }
    return out;
}

}  // namespace mfabc

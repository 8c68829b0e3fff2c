#include "mfabc/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mfabc/cache_io.hpp"

namespace mfabc {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::pair<Algorithm, std::string>> kAlgorithms = {
    {Algorithm::abc_rs, "abc-rs"},
    {Algorithm::abc_is, "abc-is"},
    {Algorithm::abc_smc, "abc-smc"},
    {Algorithm::mf_abc_rs, "mf-abc-rs"},
    {Algorithm::mf_abc_is, "mf-abc-is"},
    {Algorithm::mf_abc_smc_alpha, "mf-abc-smc-alpha"},
    {Algorithm::mf_abc_smc, "mf-abc-smc"},
};

// Rejects keys of `j` outside `allowed`; `where` names the section.
void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items()) {
        if (!ok.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <class T>
T get(const json& j, const char* key, const std::string& where, T fallback)
{
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

template <class T>
T require(const json& j, const char* key, const std::string& where)
{
    if (!j.contains(key)) throw ConfigError("missing " + where + "." + key);
    return get<T>(j, key, where, T{});
}

ContinuationPolicy parse_policy(const json& j, const std::string& where)
{
    check_keys(j, where, {"eta1", "eta2"});
    ContinuationPolicy p{require<double>(j, "eta1", where), require<double>(j, "eta2", where)};
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return p;
}

StoppingCondition parse_stop(const json& j, const std::string& where)
{
    check_keys(j, where, {"proposals", "ess", "check_every", "seconds"});
    const int kinds = int(j.contains("proposals")) + int(j.contains("ess")) + int(j.contains("seconds"));
    if (kinds != 1) throw ConfigError(where + " needs exactly one of proposals, ess, seconds");
    if (j.contains("check_every") && !j.contains("ess")) throw ConfigError(where + ".check_every applies to ess stops only");
    StoppingCondition s;
    if (j.contains("proposals")) {
        s = StoppingCondition::max_proposals(require<std::size_t>(j, "proposals", where));
    } else if (j.contains("ess")) {
        s = StoppingCondition::ess_target(require<double>(j, "ess", where),
                                          get<std::size_t>(j, "check_every", where, 100));
    } else {
        s = StoppingCondition::time_budget(require<double>(j, "seconds", where));
    }
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return s;
}

json stop_to_json(const StoppingCondition& s)
{
    switch (s.kind) {
    case StoppingCondition::Kind::max_proposals:
        return {{"proposals", s.proposals}};
    case StoppingCondition::Kind::ess_target:
        return {{"ess", s.ess}, {"check_every", s.check_every}};
    case StoppingCondition::Kind::time_budget:
        return {{"seconds", s.seconds}};
    }
    return {};
}

fs::path resolve(const fs::path& base, const std::string& p)
{
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace

Algorithm parse_algorithm(const std::string& name)
{
    for (const auto& [a, n] : kAlgorithms) {
        if (n == name) return a;
    }
    throw ConfigError("unknown algorithm '" + name + "'");
}

std::string algorithm_name(Algorithm a)
{
    for (const auto& [x, n] : kAlgorithms) {
        if (x == a) return n;
    }
    return "?";
}

bool is_multifidelity(Algorithm a)
{
    return a == Algorithm::mf_abc_rs || a == Algorithm::mf_abc_is || a == Algorithm::mf_abc_smc_alpha ||
           a == Algorithm::mf_abc_smc;
}

bool is_single_generation(Algorithm a)
{
    return a == Algorithm::abc_rs || a == Algorithm::abc_is || a == Algorithm::mf_abc_rs ||
           a == Algorithm::mf_abc_is;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text, const fs::path& base_dir)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(root, "config", {"model", "data", "algorithm", "schedule", "run"});
    ExperimentConfig c;

    const json model = root.value("model", json::object());
    check_keys(model, "model", {"oscillators", "t_end", "grid_points", "rtol", "atol", "max_rhs_evaluations", "prior", "observed"});
    c.model.oscillators = get(model, "oscillators", "model", c.model.oscillators);
    c.model.t_end = get(model, "t_end", "model", c.model.t_end);
    c.model.grid_points = get(model, "grid_points", "model", c.model.grid_points);
    c.model.rtol = get(model, "rtol", "model", c.model.rtol);
    c.model.atol = get(model, "atol", "model", c.model.atol);
    c.model.max_rhs_evaluations = get(model, "max_rhs_evaluations", "model", c.model.max_rhs_evaluations);
    if (model.contains("prior")) {
        const json& prior = model.at("prior");
        check_keys(prior, "model.prior", {"lower", "upper"});
        c.prior_lower = require<std::vector<double>>(prior, "lower", "model.prior");
        c.prior_upper = require<std::vector<double>>(prior, "upper", "model.prior");
    }
    c.observed_path = resolve(base_dir, get<std::string>(model, "observed", "model", "observed.json"));

    const json data = root.value("data", json::object());
    check_keys(data, "data", {"seed", "true_params"});
    c.data_seed = get(data, "seed", "data", c.data_seed);
    if (data.contains("true_params")) {
        const json& tp = data.at("true_params");
        check_keys(tp, "data.true_params", {"K", "omega0", "gamma"});
        c.truth.K = get(tp, "K", "data.true_params", c.truth.K);
        c.truth.omega0 = get(tp, "omega0", "data.true_params", c.truth.omega0);
        c.truth.gamma = get(tp, "gamma", "data.true_params", c.truth.gamma);
    }

    if (!root.contains("algorithm")) throw ConfigError("missing algorithm section");
    const json& alg = root.at("algorithm");
    check_keys(alg, "algorithm", {"name", "policy", "policies", "importance_cache"});
    c.algorithm = parse_algorithm(require<std::string>(alg, "name", "algorithm"));
    if (alg.contains("policy")) c.policy = parse_policy(alg.at("policy"), "algorithm.policy");
    if (alg.contains("policies")) {
        if (!alg.at("policies").is_array()) throw ConfigError("algorithm.policies must be a list");
        for (std::size_t i = 0; i < alg.at("policies").size(); ++i) {
            c.policies.push_back(parse_policy(alg.at("policies")[i], "algorithm.policies[" + std::to_string(i) + "]"));
        }
    }
    if (alg.contains("importance_cache")) {
        c.importance_cache = resolve(base_dir, require<std::string>(alg, "importance_cache", "algorithm"));
    }

    if (!root.contains("schedule")) throw ConfigError("missing schedule section");
    const json& sch = root.at("schedule");
    check_keys(sch, "schedule", {"thresholds", "adaptive", "stop", "stops", "rho", "initial_policy"});
    c.schedule.thresholds = get<std::vector<double>>(sch, "thresholds", "schedule", {});
    if (sch.contains("adaptive")) {
        const json& ad = sch.at("adaptive");
        check_keys(ad, "schedule.adaptive", {"initial_epsilon", "generations", "psi_target", "target_factor"});
        AdaptiveThresholds a;
        a.initial_epsilon = require<double>(ad, "initial_epsilon", "schedule.adaptive");
        a.generations = require<std::size_t>(ad, "generations", "schedule.adaptive");
        if (ad.contains("psi_target")) a.psi_target = require<double>(ad, "psi_target", "schedule.adaptive");
        a.target_factor = get(ad, "target_factor", "schedule.adaptive", 1.0);
        c.schedule.adaptive = a;
    }
    if (sch.contains("stop") == sch.contains("stops")) throw ConfigError("schedule needs exactly one of stop, stops");
    if (sch.contains("stop")) {
        c.schedule.stops = {parse_stop(sch.at("stop"), "schedule.stop")};
    } else {
        const json& stops = sch.at("stops");
        if (!stops.is_array()) throw ConfigError("schedule.stops must be a list");
        for (std::size_t i = 0; i < stops.size(); ++i) {
            c.schedule.stops.push_back(parse_stop(stops[i], "schedule.stops[" + std::to_string(i) + "]"));
        }
    }
    if (sch.contains("rho")) {
        const auto rho = require<std::vector<double>>(sch, "rho", "schedule");
        if (rho.size() != 2) throw ConfigError("schedule.rho must have two entries");
        c.schedule.bounds = {rho[0], rho[1]};
    }
    if (sch.contains("initial_policy")) {
        c.schedule.initial_policy = parse_policy(sch.at("initial_policy"), "schedule.initial_policy");
    }

    const json run = root.value("run", json::object());
    check_keys(run, "run", {"seed", "batch_size", "threads", "timing", "proposal_ceiling", "max_rejections", "output_dir", "replicates"});
    c.seed = get(run, "seed", "run", c.seed);
    c.batch_size = get(run, "batch_size", "run", c.batch_size);
    c.threads = get(run, "threads", "run", c.threads);
    const auto timing = get<std::string>(run, "timing", "run", "wall_clock");
    if (timing == "wall_clock") {
        c.timing = TimingMode::wall_clock;
    } else if (timing == "cost_model") {
        c.timing = TimingMode::cost_model;
    } else {
        throw ConfigError("run.timing must be wall_clock or cost_model");
    }
    c.proposal_ceiling = get(run, "proposal_ceiling", "run", c.proposal_ceiling);
    c.max_rejections = get(run, "max_rejections", "run", c.max_rejections);
    c.output_dir = resolve(base_dir, get<std::string>(run, "output_dir", "run", "runs"));
    c.replicates = get(run, "replicates", "run", c.replicates);

    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

void ExperimentConfig::validate() const
{
    try {
        model.validate();
        (void)prior();
        if (prior_lower.size() != 3) throw ConfigError("the Kuramoto prior has three components");
        schedule.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (batch_size == 0) throw ConfigError("run.batch_size must be positive");
    if (threads == 0) throw ConfigError("run.threads must be positive");
    if (replicates == 0) throw ConfigError("run.replicates must be positive");
    if (proposal_ceiling == 0 || max_rejections == 0) throw ConfigError("run limits must be positive");

    const std::string name = algorithm_name(algorithm);
    const std::size_t gens = schedule.generation_count();
    const bool wants_importance = algorithm == Algorithm::abc_is || algorithm == Algorithm::mf_abc_is;
    const bool wants_policy = algorithm == Algorithm::mf_abc_rs || algorithm == Algorithm::mf_abc_is;
    if (is_single_generation(algorithm)) {
        if (schedule.adaptive || schedule.thresholds.size() != 1) {
            throw ConfigError(name + " takes exactly one threshold");
        }
    }
    if (wants_importance != !importance_cache.empty()) {
        throw ConfigError(wants_importance ? name + " requires algorithm.importance_cache"
                                           : "algorithm.importance_cache applies to abc-is and mf-abc-is only");
    }
    if (wants_policy != policy.has_value()) {
        throw ConfigError(wants_policy ? name + " requires algorithm.policy"
                                       : "algorithm.policy applies to mf-abc-rs and mf-abc-is only");
    }
    if (algorithm == Algorithm::mf_abc_smc_alpha) {
        if (schedule.adaptive) throw ConfigError("mf-abc-smc-alpha needs explicit thresholds");
        if (policies.size() != gens) throw ConfigError("mf-abc-smc-alpha needs one policy per generation");
    } else if (!policies.empty()) {
        throw ConfigError("algorithm.policies applies to mf-abc-smc-alpha only");
    }
}

std::string ExperimentConfig::to_json() const
{
    json model_j = {{"oscillators", model.oscillators}, {"t_end", model.t_end},
                    {"grid_points", model.grid_points}, {"rtol", model.rtol},
                    {"atol", model.atol}, {"max_rhs_evaluations", model.max_rhs_evaluations},
                    {"prior", {{"lower", prior_lower}, {"upper", prior_upper}}},
                    {"observed", observed_path.string()}};
    json data_j = {{"seed", data_seed},
                   {"true_params", {{"K", truth.K}, {"omega0", truth.omega0}, {"gamma", truth.gamma}}}};
    json alg = {{"name", algorithm_name(algorithm)}};
    if (policy) alg["policy"] = {{"eta1", policy->eta1}, {"eta2", policy->eta2}};
    if (!policies.empty()) {
        alg["policies"] = json::array();
        for (const auto& p : policies) alg["policies"].push_back({{"eta1", p.eta1}, {"eta2", p.eta2}});
    }
    if (!importance_cache.empty()) alg["importance_cache"] = importance_cache.string();
    json sch = json::object();
    if (!schedule.thresholds.empty()) sch["thresholds"] = schedule.thresholds;
    if (schedule.adaptive) {
        const auto& a = *schedule.adaptive;
        sch["adaptive"] = {{"initial_epsilon", a.initial_epsilon}, {"generations", a.generations},
                           {"target_factor", a.target_factor}};
        if (a.psi_target) sch["adaptive"]["psi_target"] = *a.psi_target;
    }
    if (schedule.stops.size() == 1) {
        sch["stop"] = stop_to_json(schedule.stops.front());
    } else {
        sch["stops"] = json::array();
        for (const auto& s : schedule.stops) sch["stops"].push_back(stop_to_json(s));
    }
    sch["rho"] = {schedule.bounds.rho1, schedule.bounds.rho2};
    sch["initial_policy"] = {{"eta1", schedule.initial_policy.eta1}, {"eta2", schedule.initial_policy.eta2}};
    json run = {{"seed", seed}, {"batch_size", batch_size}, {"threads", threads},
                {"timing", timing == TimingMode::wall_clock ? "wall_clock" : "cost_model"},
                {"proposal_ceiling", proposal_ceiling}, {"max_rejections", max_rejections},
                {"output_dir", output_dir.string()}, {"replicates", replicates}};
    json root = {{"model", model_j}, {"data", data_j}, {"algorithm", alg}, {"schedule", sch}, {"run", run}};
    return root.dump(2) + "\n";
}

SamplerOptions ExperimentConfig::sampler_options(std::uint64_t run_seed) const
{
    SamplerOptions o;
    o.seed = run_seed;
    o.batch_size = batch_size;
    o.proposal_ceiling = proposal_ceiling;
    o.max_rejections = max_rejections;
    o.timing = timing;
    o.threads = threads;
    return o;
}

std::uint64_t replicate_seed(std::uint64_t master, std::size_t replicate, std::size_t replicates)
{
    return replicates == 1 ? master : derive_seed({master, static_cast<std::uint64_t>(replicate)});
}

RunResult run_experiment(const ExperimentConfig& config, const kuramoto::ObservedData& observed,
                         std::uint64_t seed, const ProgressCallback& progress)
{
    config.validate();
    const UniformPrior prior = config.prior();
    const kuramoto::Model model(config.model, observed.t_half);
    SmcSchedule schedule = config.schedule;
    if (!config.importance_cache.empty()) {
        const auto stored = read_cache_csv(config.importance_cache);
        if (stored.empty()) throw ConfigError("importance cache has no rows");
        const WeightedSample source = stored.back().cache.to_sample();
        schedule.initial_importance =
            ImportanceDistribution::mixture(source, fit_kernel(source, prior), prior);
    }
    const SamplerOptions options = config.sampler_options(seed);

    const GenerationCallback report = [&](const GenerationResult& g) {
        if (!progress) return;
        char line[256];
        std::snprintf(line, sizeof line,
                      "generation %zu: epsilon %.6g, eta (%.4g, %.4g), %zu proposals, %zu high-fidelity, ESS %.2f, %.3f s",
                      g.index, g.epsilon_used, g.policy_used.eta1, g.policy_used.eta2,
                      g.cache.entries.size(), g.cache.high_fidelity_count(),
                      compute_ess(g.sample.weights()), g.sample.total_sim_time);
        progress(line);
        for (const auto& w : g.warnings) progress("  warning: " + w);
    };

    RunResult r;
    r.algorithm = config.algorithm;
    r.seed = seed;
    const SummaryVector& y = observed.summary;
    switch (config.algorithm) {
    case Algorithm::abc_rs:
    case Algorithm::abc_is:
    case Algorithm::abc_smc:
        r.generations = abc_smc(model, prior, y, schedule, options, report);
        break;
    case Algorithm::mf_abc_rs:
    case Algorithm::mf_abc_is:
        r.generations = mf_abc_smc_alpha(model, prior, y, schedule, {*config.policy}, options, report);
        break;
    case Algorithm::mf_abc_smc_alpha:
        r.generations = mf_abc_smc_alpha(model, prior, y, schedule, config.policies, options, report);
        break;
    case Algorithm::mf_abc_smc:
        r.generations = mf_abc_smc(model, prior, y, schedule, options, report);
        break;
    }
    return r;
}

namespace {

std::string num(double v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

void write_run(const RunResult& run, const ExperimentConfig& config, const fs::path& dir)
{
    fs::create_directories(dir);
    const std::size_t dim = config.prior_lower.size();
    std::ofstream gens(dir / "generations.csv");
    if (!gens) throw std::runtime_error("cannot write " + (dir / "generations.csv").string());
    gens << "generation,epsilon,eta1,eta2,proposals,high_fidelity,ess,sim_time_ns,weight_sum,"
            "predicted_efficiency,target_unreachable,floored_importance,z,w,w_fp,w_fn,t_lo,t_hi_p,t_hi_n";
    for (std::size_t i = 1; i <= dim; ++i) gens << ",mean_theta_" << i;
    gens << '\n';

    json warnings = json::array();
    for (const auto& g : run.generations) {
        write_cache_csv(dir / ("cache_gen_" + std::to_string(g.index) + ".csv"), g.index, g.cache);
        gens << g.index << ',' << num(g.epsilon_used) << ',' << num(g.policy_used.eta1) << ','
             << num(g.policy_used.eta2) << ',' << g.cache.entries.size() << ','
             << g.cache.high_fidelity_count() << ',' << num(compute_ess(g.sample.weights())) << ','
             << to_ns(g.sample.total_sim_time) << ',' << num(g.sample.weight_sum()) << ','
             << num(g.predicted_efficiency) << ',' << (g.target_unreachable ? 1 : 0) << ','
             << g.floored_importance_values;
        if (g.coefficients) {
            const auto& c = *g.coefficients;
            for (double v : {c.z, c.w, c.w_fp, c.w_fn, c.t_lo, c.t_hi_p, c.t_hi_n}) gens << ',' << num(v);
        } else {
            gens << ",,,,,,,";
        }
        for (double m : posterior_mean(g.sample)) gens << ',' << num(m);
        gens << '\n';
        for (const auto& w : g.warnings) warnings.push_back("generation " + std::to_string(g.index) + ": " + w);
    }

    const EfficiencyReport overall = overall_efficiency(run.generations);
    json summary = {{"algorithm", algorithm_name(run.algorithm)},
                    {"seed", run.seed},
                    {"generations", run.generations.size()},
                    {"ess", overall.ess},
                    {"sim_time", overall.sim_time},
                    {"efficiency", overall.observed_efficiency},
                    {"posterior_mean", posterior_mean(run.generations.back().sample)},
                    {"warnings", warnings},
                    {"config", json::parse(config.to_json())}};
    std::ofstream out(dir / "run.json");
    out << summary.dump(2) << '\n';
    if (!out || !gens) throw std::runtime_error("error writing run artifacts in " + dir.string());
}

std::vector<fs::path> run_replicates(const ExperimentConfig& config, const ProgressCallback& progress)
{
    std::ifstream in(config.observed_path);
    if (!in) throw std::runtime_error("cannot read observed data " + config.observed_path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const auto observed = kuramoto::ObservedData::from_json(ss.str());

    std::vector<fs::path> dirs;
    for (std::size_t r = 0; r < config.replicates; ++r) {
        const std::uint64_t seed = replicate_seed(config.seed, r, config.replicates);
        char name[32];
        std::snprintf(name, sizeof name, "rep_%03zu", r);
        const fs::path dir = config.replicates == 1 ? config.output_dir : config.output_dir / name;
        if (progress) progress("run " + std::to_string(r + 1) + "/" + std::to_string(config.replicates) +
                               " (" + algorithm_name(config.algorithm) + ", seed " + std::to_string(seed) + ")");
        const RunResult result = run_experiment(config, observed, seed, progress);
        write_run(result, config, dir);
        dirs.push_back(dir);
    }
    return dirs;
}

}  // namespace mfabc

#include "mfabc/cache_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mfabc {

long long to_ns(double seconds)
{
    return std::llround(seconds * 1e9);
}

namespace {

std::string real(double v)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return fields;
}

double parse_real(const std::string& s, std::size_t line)
{
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
        throw std::runtime_error("cache line " + std::to_string(line) + ": bad number '" + s + "'");
    }
    return v;
}

long long parse_int(const std::string& s, std::size_t line)
{
    long long v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
        throw std::runtime_error("cache line " + std::to_string(line) + ": bad integer '" + s + "'");
    }
    return v;
}

}  // namespace

void write_cache_csv(std::ostream& out, std::size_t generation, const ParticleCache& cache)
{
    const std::size_t dim = cache.entries.empty() ? 0 : cache.entries.front().theta.size();
    out << "generation,index";
    for (std::size_t i = 1; i <= dim; ++i) out << ",theta_" << i;
    out << ",q_value,alpha,u,tilde_d,tilde_t_ns,hi_present,d,t_ns,weight\n";
    for (std::size_t n = 0; n < cache.entries.size(); ++n) {
        const auto& e = cache.entries[n];
        if (e.theta.size() != dim) throw std::invalid_argument("cache entries differ in dimension");
        out << generation << ',' << n;
        for (double v : e.theta) out << ',' << real(v);
        out << ',' << real(e.q_value) << ',' << real(e.alpha) << ',' << real(e.u) << ','
            << real(e.tilde_d) << ',' << to_ns(e.tilde_t) << ',' << (e.hi ? 1 : 0) << ',';
        if (e.hi) {
            out << real(e.hi->d) << ',' << to_ns(e.hi->t);
        } else {
            out << ',';
        }
        out << ',' << real(e.weight) << '\n';
    }
}

void write_cache_csv(const std::filesystem::path& path, std::size_t generation, const ParticleCache& cache)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_cache_csv(out, generation, cache);
    if (!out) throw std::runtime_error("error writing " + path.string());
}

std::vector<StoredGeneration> read_cache_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty cache file");
    const auto header = split(line);
    if (header.size() < 11 || header[0] != "generation" || header[1] != "index") {
        throw std::runtime_error("not a particle cache: unexpected header");
    }
    const std::size_t dim = header.size() - 11;
    for (std::size_t i = 0; i < dim; ++i) {
        if (header[2 + i] != "theta_" + std::to_string(i + 1)) {
            throw std::runtime_error("not a particle cache: bad parameter columns");
        }
    }
    static const char* tail[] = {"q_value", "alpha", "u", "tilde_d", "tilde_t_ns", "hi_present", "d", "t_ns", "weight"};
    for (std::size_t i = 0; i < 9; ++i) {
        if (header[2 + dim + i] != tail[i]) throw std::runtime_error("not a particle cache: bad columns");
    }

    std::vector<StoredGeneration> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != header.size()) {
            throw std::runtime_error("cache line " + std::to_string(lineno) + ": wrong field count");
        }
        const auto generation = static_cast<std::size_t>(parse_int(f[0], lineno));
        if (out.empty() || out.back().generation != generation) {
            out.push_back({generation, {}});
            out.back().cache.epsilon = 0.0;
        }
        CacheEntry e;
        e.theta.resize(dim);
        for (std::size_t i = 0; i < dim; ++i) e.theta[i] = parse_real(f[2 + i], lineno);
        const std::size_t k = 2 + dim;
        e.q_value = parse_real(f[k], lineno);
        e.alpha = parse_real(f[k + 1], lineno);
        e.u = parse_real(f[k + 2], lineno);
        e.tilde_d = parse_real(f[k + 3], lineno);
        e.tilde_t = static_cast<double>(parse_int(f[k + 4], lineno)) * 1e-9;
        const long long present = parse_int(f[k + 5], lineno);
        if (present == 1) {
            e.hi = HighFidelityRecord{parse_real(f[k + 6], lineno),
                                      static_cast<double>(parse_int(f[k + 7], lineno)) * 1e-9};
        } else if (present != 0 || !f[k + 6].empty() || !f[k + 7].empty()) {
            throw std::runtime_error("cache line " + std::to_string(lineno) + ": inconsistent high-fidelity fields");
        }
        e.weight = parse_real(f[k + 8], lineno);
        auto& cache = out.back().cache;
        cache.total_sim_time += e.tilde_t + (e.hi ? e.hi->t : 0.0);
        cache.entries.push_back(std::move(e));
    }
    return out;
}

std::vector<StoredGeneration> read_cache_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return read_cache_csv(in);
}

}  // namespace mfabc

#pragma once

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlab/arith/mult_table.hpp"
#include "mlab/arith/sieve_cache.hpp"
#include "mlab/averages/averages.hpp"
#include "mlab/dynamics/birkhoff.hpp"
#include "mlab/dynamics/flow.hpp"
#include "mlab/equidist/certificates.hpp"
#include "mlab/equidist/progression.hpp"
#include "mlab/equidist/weyl.hpp"
#include "mlab/error.hpp"
#include "mlab/factorize/factorize.hpp"
#include "mlab/io/format.hpp"
#include "mlab/parallel.hpp"
#include "mlab/phase/poly_phase.hpp"
#include "mlab/pretentious/distance.hpp"

#ifndef MLAB_VERSION
#define MLAB_VERSION "0.0.0"
#endif

namespace mlab::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

enum class ParamType { count, integer, real, text, flag, counts };

struct ParamSpec {
    std::string name;
    ParamType type;
    json fallback; // null: required
    std::string help;
};

struct CacheRecord {
    std::string path;
    std::uint32_t crc32 = 0;
    std::string source; // "built" or "loaded"
};

/// Tables and execution settings shared by one run.
class Context {
  public:
    Context(Exec exec, std::filesystem::path cache_dir) : exec_(exec), cache_dir_(std::move(cache_dir)) {}

    const Exec& exec() const { return exec_; }
    const std::filesystem::path& cache_dir() const { return cache_dir_; }
    const std::vector<CacheRecord>& cache_log() const { return cache_log_; }

    const arith::FactorTable& factors(std::uint64_t n_max) {
        n_max = std::max<std::uint64_t>(n_max, 2);
        if (!factors_ || factors_->n_max() < n_max)
            factors_ = std::make_unique<arith::FactorTable>(n_max);
        return *factors_;
    }

    /// "mobius", "liouville" (cached on disk when a cache dir is set) or "one".
    const arith::MultTable& weight(const std::string& name, std::uint64_t n_max) {
        auto key = name + "-" + std::to_string(n_max);
        if (auto it = weights_.find(key); it != weights_.end())
            return it->second;
        return weights_.emplace(key, build_weight(name, n_max)).first->second;
    }

  private:
    arith::MultTable build_weight(const std::string& name, std::uint64_t n_max) {
        if (name == "one")
            return arith::MultTable::constant(n_max, 1);
        if (name != "mobius" && name != "liouville")
            throw ArgumentError("unknown weight '" + name + "' (mobius, liouville, one)");
        std::filesystem::path path;
        if (!cache_dir_.empty()) {
            path = cache_dir_ / (name + "-" + std::to_string(n_max) + ".mlab");
            if (std::filesystem::exists(path)) {
                std::ifstream f(path, std::ios::binary);
                std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
                auto table = arith::decode_sieve_cache(bytes);
                if (table.n_max() != n_max || arith::to_string(table.kind()) != name)
                    throw ConsistencyError("cache file " + path.string() + " does not hold " + key_of(name, n_max));
                cache_log_.push_back({path.string(), static_cast<std::uint32_t>(arith::detail::get_le(bytes.data() + bytes.size() - 4, 4)), "loaded"});
                return table;
            }
        }
        const auto& ft = factors(n_max);
        auto table = name == "mobius" ? arith::mobius_table(ft) : arith::liouville_table(ft);
        if (table.n_max() != n_max)
            table = arith::MultTable::ternary(table.kind(), n_max, [&](std::uint64_t n) { return table.integral(n); });
        if (!path.empty()) {
            std::error_code ec;
            std::filesystem::create_directories(cache_dir_, ec);
            if (ec)
                throw ResourceError("cache dir " + cache_dir_.string() + " is not writable: " + ec.message());
            arith::save_sieve_cache(table, path);
            auto bytes = arith::encode_sieve_cache(table);
            cache_log_.push_back({path.string(), static_cast<std::uint32_t>(arith::detail::get_le(bytes.data() + bytes.size() - 4, 4)), "built"});
        }
        return table;
    }

    static std::string key_of(const std::string& name, std::uint64_t n) { return name + " up to " + std::to_string(n); }

    Exec exec_;
    std::filesystem::path cache_dir_;
    std::vector<CacheRecord> cache_log_;
    std::unique_ptr<arith::FactorTable> factors_;
    std::map<std::string, arith::MultTable> weights_;
};

struct Output {
    std::vector<json> reports;
    std::string csv;
};

struct Command {
    std::string name;
    std::string help;
    std::vector<ParamSpec> params;
    std::function<Output(Context&, const json&)> run;
};

// ---------------------------------------------------------------- parameters

inline json coerce(const ParamSpec& p, const json& v) {
    auto bad = [&](const std::string& why) { return ArgumentError("parameter '" + p.name + "': " + why + " (got " + v.dump() + ")"); };
    auto text = [&]() -> std::string {
        if (v.is_string())
            return v.get<std::string>();
        return v.dump();
    };
    try {
        switch (p.type) {
        case ParamType::count:
            if (v.is_number_unsigned())
                return v;
            if (v.is_number_integer()) {
                if (v.get<std::int64_t>() < 0)
                    throw bad("must be non-negative");
                return v.get<std::uint64_t>();
            }
            if (v.is_number_float()) {
                double d = v.get<double>();
                if (d < 0 || d != std::floor(d) || d > 1.8e19)
                    throw bad("must be a non-negative integer");
                return static_cast<std::uint64_t>(d);
            }
            return parse_count(text());
        case ParamType::integer:
            if (v.is_number_integer())
                return v.get<std::int64_t>();
            {
                std::string t = text();
                std::int64_t out = 0;
                auto r = std::from_chars(t.data(), t.data() + t.size(), out);
                if (r.ec != std::errc() || r.ptr != t.data() + t.size())
                    throw bad("not an integer");
                return out;
            }
        case ParamType::real:
            if (v.is_number())
                return v.get<double>();
            {
                std::string t = text();
                double out = 0;
                auto r = std::from_chars(t.data(), t.data() + t.size(), out);
                if (r.ec != std::errc() || r.ptr != t.data() + t.size())
                    throw bad("not a real number");
                return out;
            }
        case ParamType::text:
            if (!v.is_string())
                throw bad("must be a string");
            return v;
        case ParamType::flag:
            if (v.is_boolean())
                return v;
            if (text() == "true" || text() == "1")
                return true;
            if (text() == "false" || text() == "0")
                return false;
            throw bad("must be true or false");
        case ParamType::counts: {
            json arr = json::array();
            if (v.is_array()) {
                for (const auto& e : v)
                    arr.push_back(coerce(ParamSpec{p.name, ParamType::count, {}, {}}, e));
                return arr;
            }
            std::stringstream ss(text());
            for (std::string item; std::getline(ss, item, ',');)
                arr.push_back(parse_count(item));
            if (arr.empty())
                throw bad("empty list");
            return arr;
        }
        }
    } catch (const ArgumentError&) {
        throw;
    } catch (const Error& e) {
        throw bad(e.what());
    }
    throw bad("unsupported type");
}

/// Fills defaults and converts values; unknown or missing parameters are argument errors.
inline json normalize_params(const Command& cmd, const json& raw) {
    if (!raw.is_null() && !raw.is_object())
        throw ArgumentError("params must be an object");
    json out = json::object();
    for (const auto& p : cmd.params) {
        if (raw.is_object() && raw.contains(p.name))
            out[p.name] = coerce(p, raw.at(p.name));
        else if (!p.fallback.is_null())
            out[p.name] = coerce(p, p.fallback);
        else
            throw ArgumentError(cmd.name + ": missing required parameter '" + p.name + "'");
    }
    if (raw.is_object())
        for (auto it = raw.begin(); it != raw.end(); ++it)
            if (!out.contains(it.key()))
                throw ArgumentError(cmd.name + ": unknown parameter '" + it.key() + "'");
    return out;
}

namespace detail {

inline std::uint64_t u(const json& p, const char* k) { return p.at(k).get<std::uint64_t>(); }
inline std::int64_t i(const json& p, const char* k) { return p.at(k).get<std::int64_t>(); }
inline double r(const json& p, const char* k) { return p.at(k).get<double>(); }
inline std::string t(const json& p, const char* k) { return p.at(k).get<std::string>(); }
inline bool b(const json& p, const char* k) { return p.at(k).get<bool>(); }
inline std::vector<std::uint64_t> us(const json& p, const char* k) { return p.at(k).get<std::vector<std::uint64_t>>(); }

inline ParamSpec cnt(std::string n, json d, std::string h) { return {std::move(n), ParamType::count, std::move(d), std::move(h)}; }
inline ParamSpec integer(std::string n, json d, std::string h) { return {std::move(n), ParamType::integer, std::move(d), std::move(h)}; }
inline ParamSpec real(std::string n, json d, std::string h) { return {std::move(n), ParamType::real, std::move(d), std::move(h)}; }
inline ParamSpec text(std::string n, json d, std::string h) { return {std::move(n), ParamType::text, std::move(d), std::move(h)}; }
inline ParamSpec flag(std::string n, json d, std::string h) { return {std::move(n), ParamType::flag, std::move(d), std::move(h)}; }
inline ParamSpec counts(std::string n, json d, std::string h) { return {std::move(n), ParamType::counts, std::move(d), std::move(h)}; }

inline averages::Algo algo_of(const std::string& s) {
    if (s == "fast")
        return averages::Algo::fast;
    if (s == "brute")
        return averages::Algo::brute;
    throw ArgumentError("algo must be fast or brute");
}

inline Output average_output(std::vector<averages::AverageReport> rows) {
    Output out;
    out.csv = averages::csv_header() + "\n";
    for (const auto& row : rows) {
        out.reports.push_back(row);
        out.csv += averages::csv_row(row) + "\n";
    }
    return out;
}

inline Output generic(std::vector<json> reports) {
    Output out;
    out.csv = generic_csv(reports);
    out.reports = std::move(reports);
    return out;
}

inline std::string json_text(const std::string& s) {
    if (!s.empty() && (s.front() == '{' || s.front() == '['))
        return s;
    std::ifstream f(s);
    if (!f)
        throw ArgumentError("cannot read JSON file '" + s + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline json parse_json(const std::string& s, const char* what) {
    try {
        return json::parse(json_text(s));
    } catch (const json::exception& e) {
        throw ArgumentError(std::string(what) + " is not valid JSON: " + e.what());
    }
}

inline std::vector<dynamics::Angle> parse_point(const std::string& s) {
    std::vector<dynamics::Angle> x;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
        bool digits = !item.empty() && item.find_first_not_of("-0123456789") == std::string::npos;
        x.push_back(dynamics::Angle::parse(digits ? json(std::stoll(item)) : json(item)));
    }
    return x;
}

struct Flow {
    dynamics::System sys;
    dynamics::Observable F;
};

inline Flow load_flow(const json& p) {
    auto j = parse_json(t(p, "flow"), "flow");
    dynamics::FlowSpec spec;
    try {
        spec = dynamics::flow_from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("flow spec: ") + e.what());
    }
    dynamics::Observable F = dynamics::Observable::constant({1.0, 0.0});
    if (!t(p, "observable").empty())
        F = dynamics::observable_from_json(parse_json(t(p, "observable"), "observable"));
    else if (spec.observable)
        F = *spec.observable;
    dynamics::System sys(spec, parse_point(t(p, "x0")));
    return {std::move(sys), std::move(F)};
}

inline std::vector<ParamSpec> flow_params() {
    return {text("flow", nullptr, "flow spec as inline JSON or a JSON file path"), text("x0", nullptr, "initial point, comma separated angles"),
            text("observable", "", "observable JSON (defaults to the flow's, else 1)")};
}

inline std::vector<std::int64_t> ints(const std::string& s) {
    std::vector<std::int64_t> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        out.push_back(coerce(ParamSpec{"list", ParamType::integer, {}, {}}, json(item)).get<std::int64_t>());
    return out;
}

inline std::string u128_hex(u128 v) {
    std::string hex;
    do {
        hex.insert(hex.begin(), "0123456789abcdef"[static_cast<int>(v & 15)]);
        v >>= 4;
    } while (v != 0);
    return hex;
}

inline factorization::FactorizeParams factorize_params(const json& p) {
    factorization::FactorizeParams fp;
    fp.R = r(p, "R");
    fp.B = r(p, "B");
    fp.N = u(p, "N");
    fp.H = u(p, "H");
    fp.s = u(p, "s");
    fp.c_N = r(p, "c-n");
    fp.c_H = r(p, "c-h");
    fp.c_W = r(p, "c-w");
    fp.c_Q = r(p, "c-q");
    fp.K_max = i(p, "k-max");
    fp.Q_max = i(p, "q-max");
    fp.C_cert = r(p, "c-cert");
    return fp;
}

inline std::vector<ParamSpec> factorize_param_specs() {
    return {text("phase", nullptr, "vector phase, coordinates separated by ';'"),
            real("R", 10, "initial complexity"),
            real("B", 1, "good-set constant"),
            cnt("N", 500, "length"),
            cnt("H", 200, "progression length"),
            cnt("s", 1, "step modulus"),
            real("c-n", 0.5, "N > (Hs)^c"),
            real("c-h", 1.0, "H > R^c"),
            real("c-w", 0.5, "complexity growth exponent"),
            real("c-q", 2.0, "Q acceptance exponent"),
            integer("k-max", 3, "character box"),
            integer("q-max", 24, "Q search radius"),
            real("c-cert", 4.0, "certification constant")};
}

inline json pretentious_row(const std::string& f, const pretentious::MResult& m) {
    return {{"f", f},         {"X", m.X},         {"T", m.T},     {"Y", m.Y},         {"s", m.s},
            {"chi_index", m.chi_index}, {"t", m.t}, {"M", m.value}, {"grid_spacing", m.spacing}};
}

inline Output pretentious_output(const std::string& f, const std::vector<pretentious::MResult>& rows, const std::vector<double>& extra = {}) {
    Output out;
    out.csv = pretentious::csv_header() + "\n";
    for (std::size_t k = 0; k < rows.size(); ++k) {
        auto j = pretentious_row(f, rows[k]);
        if (k < extra.size())
            j["third_loglog"] = extra[k];
        out.reports.push_back(std::move(j));
        out.csv += pretentious::csv_row(f, rows[k]) + "\n";
    }
    return out;
}

inline std::vector<Command> build_commands() {
    using namespace std::string_literals;
    std::vector<Command> c;
    auto weight_param = [] { return text("weight", "mobius", "mobius, liouville or one"); };
    auto phase_param = [] { return text("phase", "0:0", "phase literal 'd:c0,...,cd' or 'fx:hex,...'"); };

    c.push_back({"sieve", "build or load a cached multiplicative table",
                 {cnt("n-max", "10^6", "table size"), text("kind", "mobius", "mobius or liouville")},
                 [](Context& ctx, const json& p) {
                     if (ctx.cache_dir().empty())
                         throw ConfigError("sieve needs a cache dir (--cache-dir or MLAB_CACHE)");
                     auto kind = t(p, "kind");
                     if (kind != "mobius" && kind != "liouville")
                         throw ArgumentError("kind must be mobius or liouville");
                     const auto& w = ctx.weight(kind, u(p, "n-max"));
                     std::uint64_t nonzero = 0;
                     for (std::uint64_t n = 1; n <= w.n_max(); ++n)
                         nonzero += w.integral(n) != 0;
                     const auto& rec = ctx.cache_log().back();
                     return generic({json{{"kind", kind}, {"n_max", w.n_max()}, {"nonzero", nonzero}, {"crc32", rec.crc32},
                                          {"file", std::filesystem::path(rec.path).filename().string()}}});
                 }});

    c.push_back({"short-ap", "short arithmetic-progression average",
                 {cnt("N", nullptr, "range"), cnt("h", 3, "window length"), cnt("s", 1, "step"), phase_param(), weight_param(),
                  integer("residue", -1, "single class a mod s (-1: all)"), text("algo", "fast", "fast or brute")},
                 [](Context& ctx, const json& p) {
                     averages::ShortAPSpec spec;
                     spec.N = u(p, "N");
                     spec.h = u(p, "h");
                     spec.s = u(p, "s");
                     spec.P = phase::parse_phase(t(p, "phase"));
                     if (i(p, "residue") >= 0)
                         spec.residue = static_cast<std::uint64_t>(i(p, "residue"));
                     auto algo = algo_of(t(p, "algo"));
                     const auto& w = ctx.weight(t(p, "weight"), spec.N + spec.h * spec.s);
                     auto rep = averages::short_ap_average(w, spec, algo, ctx.exec());
                     rep.weight = t(p, "weight");
                     return average_output({rep});
                 }});

    c.push_back({"self-corr", "self-correlation average over short progressions",
                 {cnt("N", nullptr, "range"), cnt("h", 3, "window length"), cnt("s", 1, "step"), phase_param(), weight_param(),
                  text("algo", "fast", "fast or brute")},
                 [](Context& ctx, const json& p) {
                     auto N = u(p, "N"), h = u(p, "h"), s = u(p, "s");
                     auto P = phase::parse_phase(t(p, "phase"));
                     auto algo = algo_of(t(p, "algo"));
                     const auto& w = ctx.weight(t(p, "weight"), N + h * s);
                     double v = averages::self_correlation_average(w, N, h, s, P, algo, ctx.exec());
                     return generic({json{{"quantity", "self_correlation"}, {"N", N}, {"h", h}, {"s", s}, {"poly", P.literal()},
                                          {"weight", t(p, "weight")}, {"value", v}, {"algo", t(p, "algo")}}});
                 }});

    c.push_back({"window-identity", "window-sum identity check",
                 {cnt("N", nullptr, "range"), cnt("h", 3, "window length"), cnt("s", 1, "step"), phase_param(), weight_param()},
                 [](Context& ctx, const json& p) {
                     auto N = u(p, "N"), h = u(p, "h"), s = u(p, "s");
                     auto P = phase::parse_phase(t(p, "phase"));
                     const auto& w = ctx.weight(t(p, "weight"), N + h * s);
                     json j = averages::window_identity_check(w, N, h, s, P, ctx.exec());
                     return generic({j});
                 }});

    c.push_back({"chowla", "sum of squared short-progression sums",
                 {cnt("N", nullptr, "range"), cnt("h", 20, "window length"), cnt("s", 1, "step"), weight_param()},
                 [](Context& ctx, const json& p) {
                     auto N = u(p, "N"), h = u(p, "h"), s = u(p, "s");
                     const auto& w = ctx.weight(t(p, "weight"), N + h * s);
                     json j = averages::chowla_probe(w, N, h, s, ctx.exec());
                     return generic({j});
                 }});

    c.push_back({"log-corr", "logarithmic two-point correlation",
                 {cnt("N", nullptr, "range"), cnt("h1", 0, "first shift"), cnt("h2", 1, "second shift"), phase_param(), weight_param()},
                 [](Context& ctx, const json& p) {
                     auto N = u(p, "N"), h1 = u(p, "h1"), h2 = u(p, "h2");
                     auto P = phase::parse_phase(t(p, "phase"));
                     const auto& w = ctx.weight(t(p, "weight"), N + std::max(h1, h2));
                     auto v = averages::log_average_correlation(w, N, h1, h2, P, ctx.exec());
                     return generic({json{{"N", N}, {"h1", h1}, {"h2", h2}, {"poly", P.literal()}, {"re", v.real()}, {"im", v.imag()},
                                          {"abs", std::abs(v)}}});
                 }});

    c.push_back({"ramare", "decomposition error over a window",
                 {cnt("start", 1, "window start"), cnt("H", 10000, "window length"), cnt("P", 10, "primes above P"), cnt("Q", 100, "primes up to Q"),
                  cnt("s", 6, "exclude primes dividing s"), weight_param()},
                 [](Context& ctx, const json& p) {
                     auto n = u(p, "start"), H = u(p, "H");
                     const auto& ft = ctx.factors(std::max(n + H, u(p, "Q")));
                     const auto& w = ctx.weight(t(p, "weight"), n + H);
                     auto primes = averages::prime_set(u(p, "P"), u(p, "Q"), u(p, "s"), ft);
                     json j = averages::ramare_decomposition_error(w, n, H, primes, ft);
                     return generic({j});
                 }});

    c.push_back({"bound-scan", "short AP averages over a list of window lengths",
                 {cnt("N", nullptr, "range"), cnt("s", 1, "step"), phase_param(), counts("h", "10,100,1000", "window lengths"), weight_param()},
                 [](Context& ctx, const json& p) {
                     auto N = u(p, "N"), s = u(p, "s");
                     auto hs = us(p, "h");
                     std::uint64_t hmax = 0;
                     for (auto h : hs)
                         hmax = std::max(hmax, h);
                     const auto& w = ctx.weight(t(p, "weight"), N + hmax * s);
                     auto scan = averages::bound_ratio_scan(w, N, s, phase::parse_phase(t(p, "phase")), hs, ctx.exec());
                     for (auto& row : scan.rows)
                         row.weight = t(p, "weight");
                     auto out = average_output(scan.rows);
                     for (auto& j : out.reports)
                         j["A"] = j["value"];
                     return out;
                 }});

    c.push_back({"equidist", "total equidistribution test on the torus",
                 {text("phase", nullptr, "vector phase, coordinates separated by ';'"), cnt("length", 10000, "sequence length"),
                  integer("start", 0, "first n"), integer("step", 1, "step in n"), real("delta", 0.1, "threshold"), integer("k-max", 10, "character box"),
                  cnt("cap", 100000, "exhaustive window cap"), flag("early-exit", false, "stop at first failure"),
                  flag("sampled", false, "sample windows above the cap"), cnt("samples", 1000000, "sampled windows"), cnt("seed", 1, "sampling seed")},
                 [](Context& ctx, const json& p) {
                     auto f = phase::parse_vec_phase(t(p, "phase"));
                     auto seq = equidist::TorusSequence::from_vec_phase(f, i(p, "start"), i(p, "step"), u(p, "length"));
                     equidist::EquidistOptions opt;
                     opt.delta = r(p, "delta");
                     opt.K_max = i(p, "k-max");
                     opt.exhaustive_cap = u(p, "cap");
                     opt.early_exit = b(p, "early-exit");
                     opt.sampled = b(p, "sampled");
                     opt.samples = u(p, "samples");
                     opt.seed = u(p, "seed");
                     json j = equidist::test_total_equidistribution(seq, opt, ctx.exec());
                     return generic({j});
                 }});

    c.push_back({"weyl-cert", "smallest-norm Weyl certificate",
                 {text("phase", nullptr, "vector phase"), cnt("N", nullptr, "length"), real("threshold", 1e300, "smoothness threshold"),
                  integer("d-max", 5, "search box")},
                 [](Context&, const json& p) {
                     auto cert = equidist::find_weyl_certificate(phase::parse_vec_phase(t(p, "phase")), u(p, "N"), r(p, "threshold"), i(p, "d-max"));
                     json j = {{"found", cert.has_value()}};
                     j["certificate"] = cert ? json(*cert) : json(nullptr);
                     return generic({j});
                 }});

    c.push_back({"recurrence", "interval recurrence count and certificate",
                 {text("phase", nullptr, "vector phase"), cnt("N", nullptr, "length"), text("lo", "0", "interval start (rational)"),
                  text("eps", "1/10", "interval length (rational)"), real("delta", 0.05, "hit fraction threshold"), real("c", 1.0, "radius exponent")},
                 [](Context&, const json& p) {
                     json j = equidist::recurrence_certificate(phase::parse_vec_phase(t(p, "phase")), u(p, "N"), parse_rational(t(p, "lo")),
                                                               parse_rational(t(p, "eps")), r(p, "delta"), r(p, "c"));
                     return generic({j});
                 }});

    c.push_back({"progression", "Weyl analysis along progressions",
                 {text("phase", nullptr, "vector phase"), cnt("N", nullptr, "length"), cnt("H", nullptr, "progression length"), cnt("s", 1, "step"),
                  real("r-tilde", 10, "complexity"), integer("k-max", 3, "character box"), real("c-h", 1.0, "H >= R^c"), integer("q-max", 10, "Q radius")},
                 [](Context& ctx, const json& p) {
                     equidist::ProgressionOptions opt;
                     opt.K_max = i(p, "k-max");
                     opt.c_H = r(p, "c-h");
                     opt.Q_max = i(p, "q-max");
                     json j = equidist::progression_weyl_analysis(phase::parse_vec_phase(t(p, "phase")), u(p, "N"), u(p, "H"), u(p, "s"),
                                                                  r(p, "r-tilde"), opt, ctx.exec());
                     return generic({j});
                 }});

    c.push_back({"factorize", "iterative factorization of a polynomial sequence", factorize_param_specs(), [](Context& ctx, const json& p) {
                     auto dec = factorization::factorize(phase::parse_vec_phase(t(p, "phase")), factorize_params(p), ctx.exec());
                     json j = dec;
                     j["check"] = factorization::check_decomposition(dec, ctx.exec());
                     return Output{{j}, generic_csv({j})};
                 }});

    c.push_back({"certify", "factorize and fail unless the decomposition certifies", factorize_param_specs(), [](Context& ctx, const json& p) {
                     auto dec = factorization::factorize(phase::parse_vec_phase(t(p, "phase")), factorize_params(p), ctx.exec());
                     json j = factorization::certify(dec, ctx.exec());
                     return generic({j});
                 }});

    c.push_back({"distance", "pretentious distance between two weights",
                 {cnt("X", nullptr, "prime bound"), cnt("s", 1, "exclude primes dividing s"), text("f", "mobius", "first weight"), text("g", "one", "second weight")},
                 [](Context& ctx, const json& p) {
                     auto X = u(p, "X"), s = u(p, "s");
                     const auto& ft = ctx.factors(X);
                     double d2 = pretentious::distance_squared(ctx.weight(t(p, "f"), X), ctx.weight(t(p, "g"), X), X, s, ft);
                     return generic({json{{"f", t(p, "f")}, {"g", t(p, "g")}, {"X", X}, {"s", s}, {"distance_squared", d2}, {"distance", std::sqrt(d2)}}});
                 }});

    c.push_back({"m-s", "grid minimum over characters mod s and twists",
                 {text("f", "mobius", "weight"), cnt("X", nullptr, "prime bound"), cnt("s", 1, "modulus"), real("T", 10, "twist range"),
                  real("spacing", 0, "grid spacing (0: default)")},
                 [](Context& ctx, const json& p) {
                     auto X = u(p, "X");
                     const auto& ft = ctx.factors(X);
                     const auto& f = ctx.weight(t(p, "f"), X);
                     double sp = r(p, "spacing") > 0 ? r(p, "spacing") : pretentious::default_spacing(X);
                     return pretentious_output(t(p, "f"), {pretentious::m_s(f, X, u(p, "s"), r(p, "T"), sp, ft, ctx.exec())});
                 }});

    c.push_back({"m-global", "grid minimum over moduli up to Y",
                 {text("f", "mobius", "weight"), cnt("X", nullptr, "prime bound"), real("T", 10, "twist range"), cnt("Y", 5, "modulus bound"),
                  real("spacing", 0, "grid spacing (0: default)")},
                 [](Context& ctx, const json& p) {
                     auto X = u(p, "X");
                     const auto& ft = ctx.factors(X);
                     const auto& f = ctx.weight(t(p, "f"), X);
                     double sp = r(p, "spacing") > 0 ? r(p, "spacing") : pretentious::default_spacing(X);
                     return pretentious_output(t(p, "f"), {pretentious::m_global(f, X, r(p, "T"), u(p, "Y"), sp, ft, ctx.exec())});
                 }});

    c.push_back({"probe", "non-pretentiousness growth over several X",
                 {text("f", "mobius", "weight"), counts("X", "10^4,10^5,10^6", "prime bounds"), real("T", 10, "twist range"), cnt("Y", 5, "modulus bound")},
                 [](Context& ctx, const json& p) {
                     auto Xs = us(p, "X");
                     std::uint64_t xmax = 2;
                     for (auto X : Xs)
                         xmax = std::max(xmax, X);
                     const auto& ft = ctx.factors(xmax);
                     auto res = pretentious::nonpretentious_probe(ctx.weight(t(p, "f"), xmax), Xs, r(p, "T"), u(p, "Y"), ft, ctx.exec());
                     std::vector<pretentious::MResult> rows;
                     std::vector<double> third;
                     for (const auto& row : res.rows) {
                         rows.push_back(row.M);
                         third.push_back(row.third_loglog);
                     }
                     return pretentious_output(t(p, "f"), rows, third);
                 }});

    c.push_back({"entropy", "zero-entropy check for an integer matrix",
                 {text("matrix", nullptr, "JSON integer matrix, e.g. [[1,1],[0,1]]"), flag("exact", false, "also run the exact cyclotomic test")},
                 [](Context&, const json& p) {
                     auto m = parse_json(t(p, "matrix"), "matrix");
                     dynamics::IntMatrix A;
                     for (const auto& row : m) {
                         std::vector<std::int64_t> rr;
                         for (const auto& e : row) {
                             if (!e.is_number_integer())
                                 throw ArgumentError("matrix entries must be integers: " + e.dump());
                             rr.push_back(e.get<std::int64_t>());
                         }
                         A.push_back(std::move(rr));
                     }
                     json j = dynamics::zero_entropy_check(A, b(p, "exact"));
                     return generic({j});
                 }});

    auto with = [](std::vector<ParamSpec> base, std::vector<ParamSpec> more) {
        base.insert(base.end(), more.begin(), more.end());
        return base;
    };

    c.push_back({"orbit", "orbit points T^n x0 for n < N", with(flow_params(), {cnt("N", 10, "number of points")}), [](Context&, const json& p) {
                     auto fl = load_flow(p);
                     std::vector<json> rows;
                     dynamics::OrbitCursor cur(fl.sys);
                     for (std::uint64_t n = 0; n < u(p, "N"); ++n, cur.step()) {
                         json j = {{"n", n}};
                         for (std::size_t k = 0; k < cur.state().size(); ++k) {
                             j["x" + std::to_string(k + 1)] = fl.sys.ring().to_double(cur.state()[k]);
                             j["x" + std::to_string(k + 1) + "_residue"] = u128_hex(cur.state()[k]);
                         }
                         rows.push_back(std::move(j));
                     }
                     return generic(std::move(rows));
                 }});

    auto birkhoff = [](bool logarithmic) {
        return [logarithmic](Context& ctx, const json& p) {
            auto fl = load_flow(p);
            auto N = u(p, "N");
            auto P = phase::parse_phase(t(p, "phase"));
            const auto& w = ctx.weight(t(p, "weight"), N);
            auto algo = t(p, "algo") == "brute" ? dynamics::Algo::brute : dynamics::Algo::fast;
            if (t(p, "algo") != "fast" && t(p, "algo") != "brute")
                throw ArgumentError("algo must be fast or brute");
            auto v = logarithmic ? dynamics::log_birkhoff_mu_average(fl.sys, fl.F, w, P, N, ctx.exec(), algo)
                                 : dynamics::birkhoff_mu_average(fl.sys, fl.F, w, P, N, ctx.exec(), algo);
            return generic({json{{"quantity", logarithmic ? "log_birkhoff" : "birkhoff"}, {"N", N}, {"poly", P.literal()},
                                 {"weight", t(p, "weight")}, {"re", v.real()}, {"im", v.imag()}, {"abs", std::abs(v)}}});
        };
    };
    auto birkhoff_params = [&] {
        return with(flow_params(), {cnt("N", nullptr, "range"), text("phase", "0:0", "phase literal"), text("weight", "mobius", "weight"),
                                    text("algo", "fast", "fast or brute")});
    };
    c.push_back({"birkhoff", "weighted Birkhoff average along an orbit", birkhoff_params(), birkhoff(false)});
    c.push_back({"log-birkhoff", "logarithmic weighted Birkhoff average", birkhoff_params(), birkhoff(true)});

    c.push_back({"rigidity", "empirical rigidity for given shifts",
                 with(flow_params(), {cnt("N", nullptr, "range"), counts("shifts", "1,2,3", "shifts m")}), [](Context&, const json& p) {
                     auto fl = load_flow(p);
                     auto N = u(p, "N");
                     auto shifts = us(p, "shifts");
                     std::uint64_t reach = 0;
                     for (auto m : shifts)
                         reach = std::max(reach, m);
                     auto g = dynamics::observe_orbit(fl.sys, fl.F, N + reach + 1);
                     auto vals = dynamics::empirical_rigidity(g, N, shifts);
                     std::vector<json> rows;
                     for (std::size_t k = 0; k < shifts.size(); ++k)
                         rows.push_back({{"N", N}, {"shift", shifts[k]}, {"value", vals[k]}});
                     return generic(std::move(rows));
                 }});

    c.push_back({"rigidity-scan", "rigidity along progressions for (h, s) pairs",
                 with(flow_params(), {cnt("N", nullptr, "range"), text("pairs", "10:1,100:1", "h:s pairs, comma separated")}), [](Context&, const json& p) {
                     auto fl = load_flow(p);
                     std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
                     std::stringstream ss(t(p, "pairs"));
                     for (std::string item; std::getline(ss, item, ',');) {
                         auto colon = item.find(':');
                         if (colon == std::string::npos)
                             throw ArgumentError("pair '" + item + "' must be h:s");
                         pairs.emplace_back(parse_count(item.substr(0, colon)), parse_count(item.substr(colon + 1)));
                     }
                     auto scan = dynamics::rigidity_rate_scan(fl.sys, fl.F, pairs, u(p, "N"));
                     std::vector<json> rows;
                     for (const auto& row : scan.rows) {
                         json j = row;
                         j["N"] = scan.N;
                         rows.push_back(std::move(j));
                     }
                     return generic(std::move(rows));
                 }});

    c.push_back({"skew-decomp", "character decomposition along a skew-product orbit",
                 with(flow_params(), {text("b", "0,1", "character b1,b2"), cnt("n", 100, "time")}), [](Context&, const json& p) {
                     auto fl = load_flow(p);
                     json j = dynamics::skew_character_decomposition(fl.sys, ints(t(p, "b")), u(p, "n"));
                     return generic({j});
                 }});
    return c;
}

} // namespace detail

inline const std::vector<Command>& commands() {
    static const std::vector<Command> all = detail::build_commands();
    return all;
}

inline const Command& find_command(const std::string& name) {
    for (const auto& c : commands())
        if (c.name == name)
            return c;
    throw ArgumentError("unknown subcommand '" + name + "'");
}

// ---------------------------------------------------------------- config and manifest

struct ExperimentConfig {
    int schema = kSchemaVersion;
    std::string subcommand;
    json params = json::object();
    unsigned workers = 1;
    std::string cache_dir;
    std::string output;
    std::uint64_t seed = 1;
};

inline void to_json(json& j, const ExperimentConfig& c) {
    j = {{"schema", c.schema}, {"subcommand", c.subcommand}, {"params", c.params}, {"workers", c.workers},
         {"cache_dir", c.cache_dir}, {"output", c.output}, {"seed", c.seed}};
}

inline ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object())
        throw ConfigError("config must be a JSON object");
    static const std::vector<std::string> known = {"schema", "subcommand", "params", "workers", "cache_dir", "output", "seed"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ConfigError("unknown config key '" + it.key() + "'");
    ExperimentConfig c;
    try {
        c.schema = j.at("schema").get<int>();
        c.subcommand = j.at("subcommand").get<std::string>();
        c.params = j.value("params", json::object());
        c.workers = j.value("workers", 1u);
        c.cache_dir = j.value("cache_dir", std::string());
        c.output = j.value("output", std::string());
        c.seed = j.value("seed", std::uint64_t{1});
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot read config " + path.string());
    try {
        return config_from_json(json::parse(f));
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

struct Validated {
    const Command* command = nullptr;
    json params;
};

/// Everything checked up front: schema, subcommand, parameters, workers.
inline Validated validate(ExperimentConfig& c) {
    if (c.schema != kSchemaVersion)
        throw ConfigError("config schema " + std::to_string(c.schema) + " does not match binary schema " + std::to_string(kSchemaVersion));
    if (c.workers < 1 || c.workers > 256)
        throw ArgumentError("workers must lie in [1, 256]");
    Validated v;
    v.command = &find_command(c.subcommand);
    json raw = c.params;
    for (const auto& p : v.command->params)
        if (p.name == "seed" && raw.is_object() && !raw.contains("seed"))
            raw["seed"] = c.seed;
    v.params = normalize_params(*v.command, raw);
    return v;
}

/// Output-determining part of the config (workers and paths excluded).
inline std::string config_hash(const ExperimentConfig& c, const json& normalized) {
    json canon = {{"schema", c.schema}, {"subcommand", c.subcommand}, {"params", normalized}, {"seed", c.seed}};
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canon.dump())));
    return buf;
}

struct RunManifest {
    std::string config_hash;
    std::string version = MLAB_VERSION;
    double wall_seconds = 0;
    std::uint64_t seed = 1;
    std::vector<CacheRecord> caches;
    std::vector<json> reports;
    std::vector<std::string> files;
};

inline void to_json(json& j, const RunManifest& m) {
    json caches = json::array();
    for (const auto& c : m.caches)
        caches.push_back({{"path", c.path}, {"crc32", c.crc32}, {"source", c.source}});
    j = {{"schema", kSchemaVersion}, {"config_hash", m.config_hash}, {"version", m.version}, {"wall_seconds", m.wall_seconds},
         {"seed", m.seed}, {"caches", caches}, {"reports", m.reports}, {"files", m.files}};
}

struct RunResult {
    Output output;
    RunManifest manifest;
};

inline std::string cache_dir_for(const std::string& configured) {
    if (const char* env = std::getenv("MLAB_CACHE"); env && *env)
        return env;
    return configured;
}

inline std::string jsonl(const std::vector<json>& reports) {
    std::string out;
    for (const auto& r : reports)
        out += r.dump() + "\n";
    return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& data) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw ResourceError("cannot write " + path.string());
    f << data;
    if (!f)
        throw ResourceError("short write to " + path.string());
}

/// Validates, runs, and (when an output dir is set) writes <sub>.jsonl,
/// <sub>.csv and finally manifest.json.
inline RunResult run_experiment(ExperimentConfig cfg) {
    auto t0 = std::chrono::steady_clock::now();
    auto v = validate(cfg);
    Context ctx(Exec{cfg.workers}, cache_dir_for(cfg.cache_dir));
    RunResult res;
    res.output = v.command->run(ctx, v.params);
    auto& m = res.manifest;
    m.config_hash = config_hash(cfg, v.params);
    m.seed = cfg.seed;
    m.caches = ctx.cache_log();
    m.reports = res.output.reports;
    if (!cfg.output.empty()) {
        std::filesystem::path dir(cfg.output);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec)
            throw ResourceError("output dir " + dir.string() + " is not writable: " + ec.message());
        write_file(dir / (cfg.subcommand + ".jsonl"), jsonl(res.output.reports));
        write_file(dir / (cfg.subcommand + ".csv"), res.output.csv);
        m.files = {cfg.subcommand + ".jsonl", cfg.subcommand + ".csv"};
        m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_file(dir / "manifest.json", json(m).dump(2) + "\n");
    } else {
        m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    return res;
}

/// Reports with timing fields removed.
inline std::vector<json> without_timing(std::vector<json> reports) {
    for (auto& r : reports)
        r.erase("seconds");
    return reports;
}

/// Drops the named CSV columns (timing) so outputs can be compared byte for byte.
inline std::string strip_columns(const std::string& csv, const std::vector<std::string>& drop) {
    std::stringstream in(csv);
    std::string line, out;
    std::vector<bool> keep;
    bool header = true;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        bool quoted = false;
        for (char ch : line) {
            if (ch == '"')
                quoted = !quoted;
            if (ch == ',' && !quoted) {
                cells.push_back(cell);
                cell.clear();
            } else {
                cell += ch;
            }
        }
        cells.push_back(cell);
        if (header) {
            for (const auto& name : cells)
                keep.push_back(std::find(drop.begin(), drop.end(), name) == drop.end());
            header = false;
        }
        std::string row;
        bool first = true;
        for (std::size_t k = 0; k < cells.size(); ++k)
            if (k >= keep.size() || keep[k]) {
                row += (first ? "" : ",") + cells[k];
                first = false;
            }
        out += row + "\n";
    }
    return out;
}

} // namespace mlab::io

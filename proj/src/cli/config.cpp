#include "iontrap/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "iontrap/errors.hpp"

namespace iontrap::cli {

using nlohmann::ordered_json;

namespace {

int line_of_offset(const std::string& text, std::size_t offset)
{
    offset = std::min(offset, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the first occurrence of "key" used as an object key.
int line_of_key(const std::string& text, const std::string& key)
{
    const std::string quoted = "\"" + key + "\"";
    std::size_t pos = 0;
    while ((pos = text.find(quoted, pos)) != std::string::npos) {
        std::size_t after = pos + quoted.size();
        while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
        if (after < text.size() && text[after] == ':') return line_of_offset(text, pos);
        pos = after;
    }
    return 0;
}

std::string where(const std::string& source, int line)
{
    return line > 0 ? source + ":" + std::to_string(line) : source;
}

double as_number(const ordered_json& v)
{
    if (!v.is_number()) throw std::invalid_argument("expected a number");
    return v.get<double>();
}

long long as_integer(const ordered_json& v)
{
    if (v.is_number_integer() || v.is_number_unsigned()) return v.get<long long>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::floor(d) == d && std::abs(d) < 9.0e15) return static_cast<long long>(d);
    }
    throw std::invalid_argument("expected an integer");
}

int as_int(const ordered_json& v)
{
    const long long x = as_integer(v);
    if (x < -2147483647LL || x > 2147483647LL) throw std::invalid_argument("integer out of range");
    return static_cast<int>(x);
}

std::string as_string(const ordered_json& v)
{
    if (!v.is_string()) throw std::invalid_argument("expected a string");
    return v.get<std::string>();
}

bool as_bool(const ordered_json& v)
{
    if (!v.is_boolean()) throw std::invalid_argument("expected true or false");
    return v.get<bool>();
}

using Setter = std::function<void(RunConfig&, const ordered_json&)>;

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = {
        {"sideband",
         [](RunConfig& c, const ordered_json& v) {
             const auto s = parse_sideband(as_string(v));
             if (!s) throw std::invalid_argument("expected carrier, red, blue or second-red");
             c.sideband = *s;
         }},
        {"n", [](RunConfig& c, const ordered_json& v) { c.n = as_int(v); }},
        {"n_from", [](RunConfig& c, const ordered_json& v) { c.n_from = as_int(v); }},
        {"n_to", [](RunConfig& c, const ordered_json& v) { c.n_to = as_int(v); }},
        {"eta", [](RunConfig& c, const ordered_json& v) { c.eta = as_number(v); }},
        {"omega0", [](RunConfig& c, const ordered_json& v) { c.omega0 = as_number(v); }},
        {"physical", [](RunConfig& c, const ordered_json& v) { c.physical = as_bool(v); }},
        {"noise",
         [](RunConfig& c, const ordered_json& v) {
             const std::string s = as_string(v);
             if (s == "intensity") c.noise = NoiseKind::Intensity;
             else if (s == "phase") c.noise = NoiseKind::Phase;
             else throw std::invalid_argument("expected intensity or phase");
         }},
        {"gamma", [](RunConfig& c, const ordered_json& v) { c.gamma = as_number(v); }},
        {"lambda", [](RunConfig& c, const ordered_json& v) { c.lambda = as_number(v); }},
        {"t0", [](RunConfig& c, const ordered_json& v) { c.t0 = as_number(v); }},
        {"tmax", [](RunConfig& c, const ordered_json& v) { c.tmax = as_number(v); }},
        {"points", [](RunConfig& c, const ordered_json& v) { c.points = as_int(v); }},
        {"dt", [](RunConfig& c, const ordered_json& v) { c.dt = as_number(v); }},
        {"ntraj", [](RunConfig& c, const ordered_json& v) { c.ntraj = as_int(v); }},
        {"seed",
         [](RunConfig& c, const ordered_json& v) {
             if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
                 throw std::invalid_argument("expected a non-negative integer");
             c.seed = v.get<std::uint64_t>();
         }},
        {"nmax", [](RunConfig& c, const ordered_json& v) { c.nmax = as_int(v); }},
        {"out", [](RunConfig& c, const ordered_json& v) { c.out = as_string(v); }},
        {"format", [](RunConfig& c, const ordered_json& v) { c.format = as_string(v); }},
        {"method", [](RunConfig& c, const ordered_json& v) { c.method = as_string(v); }},
        {"scheme", [](RunConfig& c, const ordered_json& v) { c.scheme = as_string(v); }},
        {"workers", [](RunConfig& c, const ordered_json& v) { c.workers = as_int(v); }},
        {"step_norm", [](RunConfig& c, const ordered_json& v) { c.step_norm = as_number(v); }},
        {"level_shift",
         [](RunConfig& c, const ordered_json& v) {
             if (v.is_null()) c.level_shift.reset();
             else c.level_shift = as_number(v);
         }},
        {"samples", [](RunConfig& c, const ordered_json& v) { c.samples = as_integer(v); }},
    };
    return table;
}

RunConfig apply(RunConfig cfg, const ordered_json& obj, const std::string& text, const std::string& source)
{
    if (!obj.is_object()) throw ConfigError(source + ": configuration must be a JSON object");
    const auto& table = setters();
    for (const auto& [key, value] : obj.items()) {
        const auto it = table.find(key);
        if (it == table.end()) {
            throw ConfigError(where(source, line_of_key(text, key)) + ": unknown key '" + key + "'");
        }
        try {
            it->second(cfg, value);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where(source, line_of_key(text, key)) + ": key '" + key + "': " + e.what());
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(where(source, line_of_key(text, key)) + ": key '" + key + "': " + e.what());
        }
    }
    // A lambda without an explicit noise kind selects phase noise.
    if (obj.contains("lambda") && !obj.contains("noise")) cfg.noise = NoiseKind::Phase;
    return cfg;
}

} // namespace

RunConfig parse_config(const std::string& text, const std::string& source)
{
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const int line = line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ConfigError(where(source, line) + ": malformed JSON: " + e.what());
    }
    if (doc.is_object() && doc.contains("schema_version") && doc.contains("config")) {
        if (!doc["schema_version"].is_number_integer() || doc["schema_version"].get<int>() > kSchemaVersion) {
            throw ConfigError(source + ": unsupported schema_version");
        }
        return apply(RunConfig{}, doc["config"], text, source);
    }
    return apply(RunConfig{}, doc, text, source);
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

RunConfig merge_config(RunConfig base, const ordered_json& overrides, const std::string& source)
{
    return apply(std::move(base), overrides, std::string(), source);
}

ordered_json to_json(const RunConfig& c)
{
    ordered_json j;
    j["sideband"] = std::string(to_string(c.sideband));
    j["n"] = c.n;
    j["n_from"] = c.n_from;
    j["n_to"] = c.n_to;
    j["eta"] = c.eta;
    j["omega0"] = c.omega0;
    j["physical"] = c.physical;
    j["noise"] = c.noise == NoiseKind::Intensity ? "intensity" : "phase";
    j["gamma"] = c.gamma;
    j["lambda"] = c.lambda;
    j["t0"] = c.t0;
    j["tmax"] = c.tmax;
    j["points"] = c.points;
    j["dt"] = c.dt;
    j["ntraj"] = c.ntraj;
    j["seed"] = c.seed;
    j["nmax"] = c.nmax;
    j["out"] = c.out;
    j["format"] = c.format;
    j["method"] = c.method;
    j["scheme"] = c.scheme;
    j["workers"] = c.workers;
    j["step_norm"] = c.step_norm;
    j["level_shift"] = c.level_shift ? ordered_json(*c.level_shift) : ordered_json(nullptr);
    j["samples"] = c.samples;
    return j;
}

void validate(const RunConfig& c)
{
    auto fail = [](const std::string& key, const std::string& what) { throw ConfigError("key '" + key + "': " + what); };
    if (c.nmax < 2) fail("nmax", "must be >= 2");
    if (c.n < 0 || c.n > c.nmax) fail("n", "must lie in [0, nmax]");
    if (c.n_from < 0 || c.n_to < c.n_from) fail("n_from", "need 0 <= n_from <= n_to");
    if (!(c.eta > 0.0 && c.eta < 1.0)) fail("eta", "must lie in (0, 1)");
    if (!(c.omega0 > 0.0) || !std::isfinite(c.omega0)) fail("omega0", "must be positive");
    if (!(c.gamma >= 0.0) || !std::isfinite(c.gamma)) fail("gamma", "must be >= 0");
    if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) fail("lambda", "must be >= 0");
    if (!(c.t0 >= 0.0)) fail("t0", "must be >= 0");
    if (!(c.tmax > c.t0)) fail("tmax", "must exceed t0");
    if (c.points < 2) fail("points", "must be >= 2");
    if (!(c.dt > 0.0)) fail("dt", "must be positive");
    if (c.ntraj < 1) fail("ntraj", "must be >= 1");
    if (c.format != "csv" && c.format != "json") fail("format", "must be csv or json");
    if (c.method != "ode" && c.method != "exact") fail("method", "must be ode or exact");
    if (c.method == "exact" && c.noise == NoiseKind::Phase) fail("method", "exact propagation covers intensity noise only");
    if (c.scheme != "exact-unitary" && c.scheme != "euler-maruyama") fail("scheme", "must be exact-unitary or euler-maruyama");
    if (c.workers < 0) fail("workers", "must be >= 0");
    if (!(c.step_norm > 0.0 && c.step_norm <= 0.1)) fail("step_norm", "must lie in (0, 0.1]");
    if (c.samples < 2) fail("samples", "must be >= 2");
}

ScaledProblem scaled_problem(const RunConfig& c)
{
    validate(c);
    const double unit = c.physical ? 1.0 / c.omega0 : 1.0;
    ScaledProblem p;
    p.params = ModelParams{c.physical ? 1.0 : c.omega0, c.eta, HilbertConfig(c.nmax)};
    p.params.validate();
    p.gamma = c.physical ? c.gamma * c.omega0 : c.gamma;
    p.lambda = c.physical ? c.lambda / c.omega0 : c.lambda;
    p.grid = TimeGrid(c.t0 / unit, c.tmax / unit, c.points);
    p.dt = c.dt / unit;
    p.time_unit = unit;
    return p;
}

TrajectoryConfig trajectory_config(const RunConfig& c, const ScaledProblem& p)
{
    TrajectoryConfig t;
    t.dt = p.dt;
    t.n_traj = c.ntraj;
    t.seed = c.seed;
    t.scheme = c.scheme == "euler-maruyama" ? IntensityScheme::EulerMaruyama : IntensityScheme::ExactUnitary;
    t.workers = c.workers;
    return t;
}

} // namespace iontrap::cli

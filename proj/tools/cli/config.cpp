#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "pilot/errors.hpp"

namespace pilot::cli {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

double number(const json& j, const std::string& key, const std::string& where) {
    const json& v = j.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return v.get<double>();
}

std::uint64_t count(const json& j, const std::string& key, const std::string& where) {
    const json& v = j.at(key);
    if (!v.is_number_unsigned()) {
        throw ConfigError(where + "." + key + ": expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

template <class T, class F>
void optional_field(const json& j, const std::string& key, T& target, F read) {
    if (j.contains(key)) target = read(j, key);
}

ModelFields parse_params(const json& j) {
    const std::string where = "params";
    check_keys(j, where, {"h", "l", "h_dag", "l_dag", "k", "alpha", "sigma", "n_plants"});
    ModelFields f;
    for (const char* key : {"h", "l", "k", "alpha", "sigma"}) {
        if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
    }
    f.h = number(j, "h", where);
    f.l = number(j, "l", where);
    f.k = number(j, "k", where);
    f.alpha = number(j, "alpha", where);
    f.sigma = number(j, "sigma", where);
    if (j.contains("n_plants")) {
        const double n = number(j, "n_plants", where);
        f.n_plants = n;
        f.h_dag = j.contains("h_dag") ? number(j, "h_dag", where) : n * f.h;
        f.l_dag = j.contains("l_dag") ? number(j, "l_dag", where) : n * f.l;
    } else {
        if (!j.contains("h_dag") || !j.contains("l_dag")) {
            throw ConfigError(where + ": give h_dag and l_dag, or n_plants");
        }
        f.h_dag = number(j, "h_dag", where);
        f.l_dag = number(j, "l_dag", where);
    }
    return f;
}

SweepConfig parse_sweep(const json& j) {
    const std::string where = "sweep";
    check_keys(j, where, {"min", "max", "count", "scale"});
    SweepConfig s;
    optional_field(j, "min", s.min, [&](const json& o, const std::string& k) { return number(o, k, where); });
    optional_field(j, "max", s.max, [&](const json& o, const std::string& k) { return number(o, k, where); });
    optional_field(j, "count", s.count, [&](const json& o, const std::string& k) { return count(o, k, where); });
    if (j.contains("scale")) {
        const json& v = j.at("scale");
        if (v != "log" && v != "linear") throw ConfigError("sweep.scale: expected \"log\" or \"linear\"");
        s.log = v == "log";
    }
    if (!(s.min > 0.0 && s.max > s.min)) throw ConfigError("sweep: need 0 < min < max");
    if (s.count < 2) throw ConfigError("sweep.count: need at least 2 points");
    return s;
}

McConfig parse_mc(const json& j) {
    const std::string where = "mc";
    check_keys(j, where, {"reps", "dt", "seed", "horizon", "paths", "record_every"});
    McConfig m;
    auto num = [&](const json& o, const std::string& k) { return number(o, k, where); };
    auto cnt = [&](const json& o, const std::string& k) { return count(o, k, where); };
    optional_field(j, "reps", m.reps, cnt);
    optional_field(j, "dt", m.dt, num);
    optional_field(j, "seed", m.seed, cnt);
    optional_field(j, "horizon", m.horizon, num);
    optional_field(j, "paths", m.paths, cnt);
    optional_field(j, "record_every", m.record_every, cnt);
    if (m.reps < 2) throw ConfigError("mc.reps: need at least 2");
    if (!(m.dt >= 0.0)) throw ConfigError("mc.dt: must be >= 0");
    if (!(m.horizon > 0.0)) throw ConfigError("mc.horizon: must be > 0");
    if (m.record_every < 1) throw ConfigError("mc.record_every: must be >= 1");
    return m;
}

CertifyConfig parse_certify(const json& j) {
    const std::string where = "certify";
    check_keys(j, where, {"reps", "grid_n", "perturbation"});
    CertifyConfig c;
    optional_field(j, "reps", c.reps, [&](const json& o, const std::string& k) { return count(o, k, where); });
    optional_field(j, "grid_n", c.grid_n, [&](const json& o, const std::string& k) { return count(o, k, where); });
    optional_field(j, "perturbation", c.perturbation,
                   [&](const json& o, const std::string& k) { return number(o, k, where); });
    if (c.reps < 2) throw ConfigError("certify.reps: need at least 2");
    if (c.grid_n < 3 || c.grid_n % 2 == 0) throw ConfigError("certify.grid_n: must be odd and >= 3");
    if (!(c.perturbation > 0.0 && c.perturbation < 0.5)) {
        throw ConfigError("certify.perturbation: must be in (0, 0.5)");
    }
    return c;
}

}  // namespace

ModelParams RunConfig::model_params() const {
    if (!params) throw ConfigError("config has no 'params' section");
    return ModelParams(*params);
}

RunConfig parse_config(const json& j) {
    try {
        check_keys(j, "config",
                   {"model", "params", "p0", "sweep", "mc", "certify", "asymptotics", "output"});
        RunConfig cfg;
        if (j.contains("model")) {
            const json& m = j.at("model");
            if (m != "base" && m != "extended") {
                throw ConfigError("model: expected \"base\" or \"extended\"");
            }
            cfg.model = m.get<std::string>();
        }
        if (j.contains("params")) cfg.params = parse_params(j.at("params"));
        if (j.contains("p0")) {
            const double p0 = number(j, "p0", "config");
            if (!(p0 > 0.0 && p0 < 1.0)) throw ConfigError("p0: must be in (0, 1)");
            cfg.p0 = p0;
        }
        if (j.contains("sweep")) cfg.sweep = parse_sweep(j.at("sweep"));
        if (j.contains("mc")) cfg.mc = parse_mc(j.at("mc"));
        if (j.contains("certify")) cfg.certify = parse_certify(j.at("certify"));
        if (j.contains("asymptotics")) {
            const json& a = j.at("asymptotics");
            check_keys(a, "asymptotics", {"sigmas"});
            if (a.contains("sigmas")) {
                const json& s = a.at("sigmas");
                if (!s.is_array() || s.empty()) {
                    throw ConfigError("asymptotics.sigmas: expected a non-empty array");
                }
                cfg.asymptotic_sigmas.clear();
                for (const json& v : s) {
                    if (!v.is_number() || !(v.get<double>() > 0.0)) {
                        throw ConfigError("asymptotics.sigmas: entries must be positive numbers");
                    }
                    cfg.asymptotic_sigmas.push_back(v.get<double>());
                }
            }
        }
        if (j.contains("output")) {
            if (!j.at("output").is_string()) throw ConfigError("output: expected a string");
            cfg.output = j.at("output").get<std::string>();
        }
        if (cfg.params) (void)cfg.model_params();
        return cfg;
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("params: ") + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(e.what());
    }
}

json to_json(const RunConfig& cfg) {
    json j;
    j["model"] = cfg.model;
    if (cfg.params) {
        const ModelFields& f = *cfg.params;
        json p{{"h", f.h},         {"l", f.l}, {"h_dag", f.h_dag}, {"l_dag", f.l_dag},
               {"k", f.k},         {"alpha", f.alpha}, {"sigma", f.sigma}};
        if (f.n_plants) p["n_plants"] = *f.n_plants;
        j["params"] = p;
    }
    if (cfg.p0) j["p0"] = *cfg.p0;
    if (cfg.sweep) {
        j["sweep"] = {{"min", cfg.sweep->min},
                      {"max", cfg.sweep->max},
                      {"count", cfg.sweep->count},
                      {"scale", cfg.sweep->log ? "log" : "linear"}};
    }
    j["mc"] = {{"reps", cfg.mc.reps},       {"dt", cfg.mc.dt},       {"seed", cfg.mc.seed},
               {"horizon", cfg.mc.horizon}, {"paths", cfg.mc.paths}, {"record_every", cfg.mc.record_every}};
    j["certify"] = {{"reps", cfg.certify.reps},
                    {"grid_n", cfg.certify.grid_n},
                    {"perturbation", cfg.certify.perturbation}};
    j["asymptotics"] = {{"sigmas", cfg.asymptotic_sigmas}};
    return j;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    if (text.rfind("#", 0) == 0) {
        static const std::string tag = "# config: ";
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line) && line.rfind("#", 0) == 0) {
            if (line.rfind(tag, 0) == 0) {
                try {
                    return parse_config(json::parse(line.substr(tag.size())));
                } catch (const json::exception& e) {
                    throw ConfigError(path + ": " + e.what());
                }
            }
        }
        throw ConfigError(path + ": header block has no '# config:' line");
    }
    try {
        return parse_config(json::parse(text));
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace pilot::cli

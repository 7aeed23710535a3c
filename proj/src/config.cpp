#include "fplab/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fplab/io.hpp"
#include "fplab/kernels.hpp"

namespace fplab {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

ConfigValue parse_scalar(const std::string& raw, const std::string& where) {
    std::string v = trim(raw);
    if (v.empty()) throw std::invalid_argument("config: empty value for " + where);
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"')
            throw std::invalid_argument("config: unterminated string for " + where);
        return v.substr(1, v.size() - 2);
    }
    if (v == "true") return true;
    if (v == "false") return false;
    char* end = nullptr;
    double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() + v.size()) return d;
    throw std::invalid_argument("config: cannot parse value '" + v + "' for " + where);
}

ConfigValue parse_value(const std::string& raw, const std::string& where) {
    std::string v = trim(raw);
    if (!v.empty() && v.front() == '[') {
        if (v.back() != ']') throw std::invalid_argument("config: unterminated array for " + where);
        std::string body = v.substr(1, v.size() - 2);
        std::vector<std::string> items;
        std::string cur;
        bool instr = false;
        for (char c : body) {
            if (c == '"') instr = !instr;
            if (c == ',' && !instr) {
                items.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!trim(cur).empty()) items.push_back(cur);
        std::vector<double> nums;
        std::vector<std::string> strs;
        bool all_nums = true;
        for (auto& item : items) {
            ConfigValue s = parse_scalar(item, where);
            if (std::holds_alternative<double>(s)) {
                nums.push_back(std::get<double>(s));
            } else if (std::holds_alternative<std::string>(s)) {
                all_nums = false;
                strs.push_back(std::get<std::string>(s));
            } else {
                throw std::invalid_argument("config: array of booleans not supported for " + where);
            }
        }
        if (all_nums && strs.empty()) return nums;
        if (!all_nums && nums.empty()) return strs;
        throw std::invalid_argument("config: mixed array types for " + where);
    }
    return parse_scalar(v, where);
}

std::string render(const ConfigValue& v) {
    std::ostringstream os;
    if (std::holds_alternative<bool>(v)) {
        os << (std::get<bool>(v) ? "true" : "false");
    } else if (std::holds_alternative<double>(v)) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", std::get<double>(v));
        os << buf;
    } else if (std::holds_alternative<std::string>(v)) {
        os << '"' << std::get<std::string>(v) << '"';
    } else if (std::holds_alternative<std::vector<double>>(v)) {
        os << '[';
        const auto& xs = std::get<std::vector<double>>(v);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.17g", xs[i]);
            os << buf << (i + 1 < xs.size() ? "," : "");
        }
        os << ']';
    } else {
        os << '[';
        const auto& xs = std::get<std::vector<std::string>>(v);
        for (std::size_t i = 0; i < xs.size(); ++i)
            os << '"' << xs[i] << '"' << (i + 1 < xs.size() ? "," : "");
        os << ']';
    }
    return os.str();
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
    values_["coupling.shape"] = std::string("gaussian");
    values_["coupling.g"] = 1.0;
    values_["coupling.sigma"] = 1.0;
    values_["coupling.m"] = 1.0;
    values_["coupling.omega0"] = 2.0;
    values_["grid.L"] = 48.0;
    values_["grid.npts"] = 48.0;
    values_["integrator.dt"] = 0.01;
    values_["integrator.T"] = 20.0;
    values_["integrator.method"] = std::string("spectral");
    values_["measure.kind"] = std::string("gibbs");
    values_["measure.T"] = 1.0;
    values_["measure.particle"] = std::string("gibbs_A");
    values_["measure.particle_T"] = 1.0;
    values_["ensemble.size"] = 2000.0;
    values_["ensemble.base_seed"] = 12345.0;
    values_["output.dir"] = std::string("out");
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = line;
        bool instr = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '"') instr = !instr;
            if (s[i] == '#' && !instr) {
                s = s.substr(0, i);
                break;
            }
        }
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw std::invalid_argument("config: bad section header at line " + std::to_string(lineno));
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value at line " + std::to_string(lineno));
        std::string key = trim(s.substr(0, eq));
        std::string full = section.empty() ? key : section + "." + key;
        cfg.values_[full] = parse_value(s.substr(eq + 1), full);
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str());
}

void ExperimentConfig::apply_override(const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override: expected KEY=VALUE, got '" + assignment + "'");
    std::string key = trim(assignment.substr(0, eq));
    values_[key] = parse_value(assignment.substr(eq + 1), key);
}

double ExperimentConfig::number(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw std::invalid_argument("config: missing key " + key);
    if (!std::holds_alternative<double>(it->second))
        throw std::invalid_argument("config: key " + key + " is not a number");
    return std::get<double>(it->second);
}

double ExperimentConfig::number_or(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (!std::holds_alternative<double>(it->second))
        throw std::invalid_argument("config: key " + key + " is not a number");
    return std::get<double>(it->second);
}

bool ExperimentConfig::flag_or(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (!std::holds_alternative<bool>(it->second))
        throw std::invalid_argument("config: key " + key + " is not a boolean");
    return std::get<bool>(it->second);
}

std::string ExperimentConfig::text(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw std::invalid_argument("config: missing key " + key);
    if (!std::holds_alternative<std::string>(it->second))
        throw std::invalid_argument("config: key " + key + " is not a string");
    return std::get<std::string>(it->second);
}

std::string ExperimentConfig::text_or(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return text(key);
}

std::vector<std::string> ExperimentConfig::string_list_or(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return {};
    if (std::holds_alternative<std::vector<std::string>>(it->second))
        return std::get<std::vector<std::string>>(it->second);
    if (std::holds_alternative<std::string>(it->second))
        return {std::get<std::string>(it->second)};
    throw std::invalid_argument("config: key " + key + " is not a string list");
}

std::vector<double> ExperimentConfig::number_list_or(const std::string& key,
                                                     const std::vector<double>& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (std::holds_alternative<std::vector<double>>(it->second))
        return std::get<std::vector<double>>(it->second);
    if (std::holds_alternative<double>(it->second)) return {std::get<double>(it->second)};
    throw std::invalid_argument("config: key " + key + " is not a number list");
}

std::string ExperimentConfig::canonical_text() const {
    std::ostringstream os;
    for (const auto& [k, v] : values_) os << k << "=" << render(v) << "\n";
    return os.str();
}

std::string ExperimentConfig::hash() const { return hex64(fnv1a64(canonical_text())); }

CouplingSpec ExperimentConfig::coupling() const {
    CouplingSpec spec;
    std::string shape = text_or("coupling.shape", "gaussian");
    if (shape == "gaussian")
        spec.shape = CouplingShape::gaussian;
    else if (shape == "radial_bump")
        spec.shape = CouplingShape::radial_bump;
    else
        throw std::invalid_argument("config: unknown coupling.shape '" + shape + "'");
    spec.amplitude = number_or("coupling.g", 1.0);
    spec.width = number_or("coupling.sigma", 1.0);
    spec.mass = number_or("coupling.m", 1.0);
    spec.omega0 = number_or("coupling.omega0", 2.0);
    return spec;
}

ModeGrid ExperimentConfig::make_grid() const {
    return ModeGrid(number_or("grid.L", 48.0),
                    static_cast<int>(number_or("grid.npts", 48.0)));
}

SpectralDensity ExperimentConfig::field_density() const {
    std::string kind = text_or("measure.kind", "gibbs");
    if (kind == "gibbs") return gibbs_field_density(number_or("measure.T", 1.0), coupling());
    if (kind == "generic")
        return generic_density(number_or("measure.a00", 0.5), number_or("measure.a11", 1.5),
                               number_or("measure.corr_length", 0.7));
    if (kind == "two_temperature")
        throw std::invalid_argument("config: two_temperature measures are drawn by the two-temp runner, not as a mode-wise density");
    throw std::invalid_argument("config: unknown measure.kind '" + kind + "'");
}

ParticleLaw ExperimentConfig::particle_law() const {
    std::string law = text_or("measure.particle", "gibbs_A");
    if (law == "gibbs_A") return ParticleLaw::gibbs_A;
    if (law == "gibbs_eff") return ParticleLaw::gibbs_eff;
    throw std::invalid_argument("config: unknown measure.particle '" + law + "'");
}

double ExperimentConfig::particle_temperature() const {
    return number_or("measure.particle_T", 1.0);
}

std::uint64_t ExperimentConfig::base_seed() const {
    return static_cast<std::uint64_t>(number_or("ensemble.base_seed", 12345.0));
}

std::size_t ExperimentConfig::ensemble_size() const {
    return static_cast<std::size_t>(number_or("ensemble.size", 2000.0));
}

std::vector<std::string> ExperimentConfig::validate() const {
    std::vector<std::string> problems;
    CouplingSpec spec;
    try {
        spec = coupling();
        spec.validate();
    } catch (const std::exception& e) {
        problems.emplace_back(e.what());
        return problems;
    }
    double L = number_or("grid.L", 48.0);
    double npts = number_or("grid.npts", 48.0);
    if (npts <= 0 || static_cast<int>(npts) % 2 != 0)
        problems.emplace_back("grid.npts must be a positive even integer");
    if (L <= 0) problems.emplace_back("grid.L must be positive");
    if (dt() <= 0) problems.emplace_back("integrator.dt must be positive");
    if (horizon() <= 0) problems.emplace_back("integrator.T must be positive");
    std::string m = method();
    if (m != "spectral" && m != "leapfrog")
        problems.emplace_back("integrator.method must be 'spectral' or 'leapfrog'");
    if (m == "leapfrog") {
        double kn = 3.14159265358979323846 * npts / L;
        double wmax = std::sqrt(3.0 * kn * kn + spec.mass * spec.mass);
        if (dt() * wmax >= 2.0)
            problems.emplace_back("integrator.dt violates the leapfrog CFL bound dt < 2/omega_max");
    }
    std::string kind = text_or("measure.kind", "gibbs");
    if (kind == "gibbs" && number_or("measure.T", 1.0) <= 0.0)
        problems.emplace_back("measure.T must be positive for the gibbs measure");
    if (kind == "two_temperature") {
        double a = number_or("measure.a", 2.0);
        if (!(2.0 * a < L / 4.0))
            problems.emplace_back("two-temperature transitions overlap after periodization (need 2a < L/4)");
        if (number_or("measure.T_minus", 1.0) <= 0.0 || number_or("measure.T_plus", 2.0) <= 0.0)
            problems.emplace_back("two-temperature temperatures must be positive");
        if (spec.mass <= 0.0)
            problems.emplace_back("two-temperature measures require the Klein-Gordon field (m > 0)");
    }
    if (!flag_or("stability.skip", false)) {
        try {
            auto rep = stability_scan(spec, number_or("stability.y_max", 12.0),
                                      static_cast<int>(number_or("stability.n_scan", 400.0)));
            if (!rep.r1prime_ok)
                problems.emplace_back("stability: omega0^2 I - K_m is not positive definite (R1' fails), det A(0) = " +
                                      std::to_string(rep.det_A0));
            else if (!rep.stable && !rep.marginal_uncoupled)
                problems.emplace_back("stability: imaginary-axis margin is not positive");
        } catch (const std::exception& e) {
            problems.emplace_back(std::string("stability scan failed: ") + e.what());
        }
    }
    return problems;
}

}  // namespace fplab

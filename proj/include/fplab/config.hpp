#pragma once

// Experiment configuration: a flat dotted-key store parsed from a TOML-style
// file ([section] tables, key = value, strings, numbers, booleans, and flat
// arrays). The canonical text of the store is hashed into every artifact.

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "fplab/coupling.hpp"
#include "fplab/mode_grid.hpp"
#include "fplab/random_fields.hpp"

namespace fplab {

using ConfigValue = std::variant<bool, double, std::string, std::vector<double>,
                                 std::vector<std::string>>;

class ExperimentConfig {
  public:
    ExperimentConfig();  // defaults

    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_text(const std::string& text);

    // "section.key=value" (value parsed with the same rules as the file)
    void apply_override(const std::string& assignment);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    bool flag_or(const std::string& key, bool fallback) const;
    std::string text(const std::string& key) const;
    std::string text_or(const std::string& key, const std::string& fallback) const;
    std::vector<std::string> string_list_or(const std::string& key) const;
    std::vector<double> number_list_or(const std::string& key,
                                       const std::vector<double>& fallback) const;
    void set(const std::string& key, ConfigValue v) { values_[key] = std::move(v); }

    std::string canonical_text() const;
    std::string hash() const;

    // typed views
    CouplingSpec coupling() const;
    ModeGrid make_grid() const;
    SpectralDensity field_density() const;
    ParticleLaw particle_law() const;
    double particle_temperature() const;
    double dt() const { return number_or("integrator.dt", 0.01); }
    double horizon() const { return number_or("integrator.T", 20.0); }
    std::string method() const { return text_or("integrator.method", "spectral"); }
    std::uint64_t base_seed() const;
    std::size_t ensemble_size() const;

    // throws std::invalid_argument on malformed configs; returns a list of
    // human-readable validation problems (empty = valid)
    std::vector<std::string> validate() const;

  private:
    std::map<std::string, ConfigValue> values_;
};

}  // namespace fplab

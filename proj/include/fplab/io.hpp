#pragma once

// Artifact writers. Every output embeds the config hash and code version:
// CSV as leading comment lines, JSON as fields, NDJSON in the meta record.

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace fplab {

inline constexpr const char* kVersion = "0.1.0";

inline std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v);

class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::string& config_hash,
              const std::vector<std::string>& columns);
    void row(const std::vector<double>& values);
    // trailing string column variant
    void row(const std::vector<double>& values, const std::string& tag);

  private:
    std::ofstream out_;
};

void write_json_file(const std::string& path, const std::string& config_hash,
                     const std::string& body_json);

}  // namespace fplab

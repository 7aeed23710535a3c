#include "fplab/io.hpp"

#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace fplab {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::string& config_hash,
                     const std::vector<std::string>& columns)
    : out_(path) {
    if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
    out_ << "# config_hash=" << config_hash << " version=" << kVersion << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
        out_ << columns[i] << (i + 1 < columns.size() ? "," : "");
    out_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
    char buf[32];
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
        out_ << buf << (i + 1 < values.size() ? "," : "");
    }
    out_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values, const std::string& tag) {
    char buf[32];
    for (double v : values) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out_ << buf << ",";
    }
    out_ << tag << "\n";
}

void write_json_file(const std::string& path, const std::string& config_hash,
                     const std::string& body_json) {
    auto j = nlohmann::json::parse(body_json);
    j["config_hash"] = config_hash;
    j["version"] = kVersion;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_json_file: cannot open " + path);
    out << j.dump(2) << "\n";
}

}  // namespace fplab

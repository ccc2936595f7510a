#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "reachlab/common.hpp"

namespace reachlab {

// Round-trip-safe decimal formatting (17 significant digits).
inline std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Stable hash of a config document (nlohmann dumps objects with sorted keys).
inline std::string config_hash_hex(const nlohmann::json& config) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config.dump())));
    return buf;
}

// Writes via a temporary file in the same directory, then renames.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path dir = path.parent_path();
    if (dir.empty()) dir = ".";
    fs::path tmp = dir / (".tmp-" + path.filename().string() + "-" +
                          std::to_string(static_cast<unsigned long>(::getpid())));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot open output file: " + tmp.string());
        out << content;
        if (!out) throw ValidationError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw ValidationError("cannot rename output into place: " + path.string());
    }
}

// CSV buffer with a hash-carrying comment header and a column header row.
class CsvBuilder {
public:
    CsvBuilder(const std::string& tool, const std::string& hash,
               const std::vector<std::string>& columns, const std::string& units = "abstract-length") {
        buf_ << "# reachlab " << tool << " config_hash=" << hash << " units=" << units << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i) buf_ << (i ? "," : "") << columns[i];
        buf_ << "\n";
    }

    void comment(const std::string& line) { buf_ << "# " << line << "\n"; }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) buf_ << (i ? "," : "") << cells[i];
        buf_ << "\n";
    }

    void row_numeric(const std::vector<double>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) buf_ << (i ? "," : "") << format_g17(cells[i]);
        buf_ << "\n";
    }

    std::string str() const { return buf_.str(); }

private:
    std::ostringstream buf_;
};

// Grid spec: either "a:b:m" (m equally spaced points from a to b inclusive)
// or a comma-separated list of values.
inline std::vector<double> parse_grid(const std::string& spec) {
    std::vector<double> grid;
    if (spec.find(':') != std::string::npos) {
        double a, b;
        int m;
        if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &a, &b, &m) != 3 || m < 1)
            throw ValidationError("grid spec must be a:b:m or a comma list: " + spec);
        if (m == 1) {
            grid.push_back(a);
        } else {
            for (int i = 0; i < m; ++i) grid.push_back(a + (b - a) * i / (m - 1));
        }
        return grid;
    }
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        grid.push_back(std::stod(item));
    }
    if (grid.empty()) throw ValidationError("empty grid spec");
    return grid;
}

}  // namespace reachlab

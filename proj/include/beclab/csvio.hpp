#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "beclab/errors.hpp"

namespace beclab {

/// Shortest round-trip decimal form of a double ('.' separator, no locale).
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    // prefer the shortest representation that round-trips
    for (int prec = 1; prec <= 16; ++prec) {
        char trial[40];
        std::snprintf(trial, sizeof(trial), "%.*g", prec, x);
        if (std::strtod(trial, nullptr) == x) return trial;
    }
    return buf;
}

/// Write a file atomically (temp + rename); UTF-8, LF terminators.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw SolverError("cannot open " + tmp + " for writing");
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

/// Minimal CSV emitter: header row mandatory, LF rows, '.' decimals.
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header) : columns_(std::move(header)) {
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (i) body_ += ',';
            body_ += columns_[i];
        }
        body_ += '\n';
    }

    void row(const std::vector<double>& values) {
        if (values.size() != columns_.size())
            throw GridMismatch("CSV row width mismatch");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) body_ += ',';
            body_ += format_double(values[i]);
        }
        body_ += '\n';
    }

    void save(const std::filesystem::path& path) const { atomic_write(path, body_); }
    const std::string& text() const { return body_; }

  private:
    std::vector<std::string> columns_;
    std::string body_;
};

/// Counter-based deterministic generator (splitmix64) for seeded initial data.
struct CounterRng {
    std::uint64_t seed = 0;
    double uniform(std::uint64_t counter) const {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (counter + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z = z ^ (z >> 31);
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    }
};

} // namespace beclab

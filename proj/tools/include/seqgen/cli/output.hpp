#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace seqgen::cli {

inline constexpr const char *kCsvSchema = "# seqgen-csv v1";

// Buffered CSV table; values are printed with %.17g so reruns are byte-identical.
class CsvTable {
  public:
    explicit CsvTable(std::vector<std::string> columns);
    void comment(const std::string &line);
    void row(const std::vector<double> &values);
    [[nodiscard]] std::string text() const;
    [[nodiscard]] std::size_t rows() const { return rows_; }

  private:
    std::vector<std::string> columns_;
    std::vector<std::string> comments_;
    std::string body_;
    std::size_t rows_ = 0;
};

std::string format_number(double v);
std::string sha256_hex(const std::string &bytes);
std::string sha256_file(const std::string &path);

// a.csv -> a.manifest.json
std::string manifest_path(const std::string &out);

struct RunManifest {
    std::string subcommand;
    std::map<std::string, std::string> params;
    std::uint64_t seed = 0;
    std::string version;
    std::vector<std::string> outputs;
    double duration_seconds = 0.0;
};

std::string manifest_json(const RunManifest &m);

// Writes the CSV, then its manifest with the digest of what landed on disk.
void write_outputs(const std::string &out, const CsvTable &table, RunManifest manifest,
                   std::chrono::steady_clock::time_point started);

} // namespace seqgen::cli

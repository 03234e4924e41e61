#include "seqgen/cli/output.hpp"

#include "seqgen/errors.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

namespace seqgen::cli {

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::comment(const std::string &line) { comments_.push_back(line); }

std::string format_number(double v) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return buf.data();
}

void CsvTable::row(const std::vector<double> &values) {
    require(values.size() == columns_.size(), ErrorCode::DimensionMismatch, "csv row width does not match header");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) {
            body_ += ',';
        }
        body_ += format_number(values[i]);
    }
    body_ += '\n';
    ++rows_;
}

std::string CsvTable::text() const {
    std::string out = std::string(kCsvSchema) + "\n";
    for (const auto &c : comments_) {
        out += "# " + c + "\n";
    }
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        out += (i ? "," : "") + columns_[i];
    }
    out += '\n';
    return out + body_;
}

std::string sha256_hex(const std::string &bytes) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) {
        fail(ErrorCode::InvalidArgument, "sha256 failed");
    }
    static const char *hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string sha256_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::InvalidArgument, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

std::string manifest_path(const std::string &out) {
    std::filesystem::path p(out);
    p.replace_extension(".manifest.json");
    return p.string();
}

std::string manifest_json(const RunManifest &m) {
    nlohmann::ordered_json j;
    j["format"] = "seqgen-manifest";
    j["version"] = 1;
    j["subcommand"] = m.subcommand;
    j["params"] = m.params;
    j["seed"] = m.seed;
    j["tool_version"] = m.version;
    auto outs = nlohmann::ordered_json::array();
    for (const auto &path : m.outputs) {
        outs.push_back({{"path", std::filesystem::path(path).filename().string()},
                        {"sha256", sha256_file(path)},
                        {"bytes", std::filesystem::file_size(path)}});
    }
    j["outputs"] = outs;
    j["duration_seconds"] = m.duration_seconds;
    return j.dump(2) + "\n";
}

namespace {

void write_file(const std::string &path, const std::string &text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(f), ErrorCode::InvalidArgument, "cannot open " + path + " for writing");
    f << text;
    f.close();
    require(!f.fail(), ErrorCode::InvalidArgument, "write to " + path + " failed");
}

} // namespace

void write_outputs(const std::string &out, const CsvTable &table, RunManifest manifest,
                   std::chrono::steady_clock::time_point started) {
    write_file(out, table.text());
    manifest.outputs = {out};
    manifest.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_file(manifest_path(out), manifest_json(manifest));
}

} // namespace seqgen::cli

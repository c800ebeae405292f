// Run manifests: what was run, on which problem, with which tolerances, and
// digests of everything written.

#ifndef PLAPKAM_TOOLS_MANIFEST_HPP
#define PLAPKAM_TOOLS_MANIFEST_HPP

#include "plapkam/dynamics.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace plapkam::cli {

std::string sha256_hex(const std::string& bytes);

/// Collects outputs of one run in a directory and writes manifest.json last.
class Run {
public:
    Run(std::string command, std::filesystem::path out_dir);

    void set_arguments(nlohmann::ordered_json arguments) { arguments_ = std::move(arguments); }
    void set_problem(const std::string& canonical_json);
    void set_tolerances(const IntegratorConfig& config);

    /// Writes out_dir/name and records its digest.
    void write(const std::string& name, const std::string& content);

    /// Writes manifest.json.  The manifest-hash field covers everything
    /// except the timestamps.
    void finish(int exit_code, const std::string& error = {});

private:
    std::string command_;
    std::filesystem::path dir_;
    std::string started_;
    nlohmann::ordered_json arguments_ = nlohmann::ordered_json::object();
    std::optional<std::string> problem_hash_;
    nlohmann::ordered_json tolerances_;
    nlohmann::ordered_json outputs_ = nlohmann::ordered_json::object();
};

}  // namespace plapkam::cli

#endif

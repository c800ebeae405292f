#include "manifest.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <stdexcept>

namespace plapkam::cli {

namespace {

std::string utc_now()
{
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[40];
    const std::size_t n = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    std::snprintf(buf + n, sizeof buf - n, ".%03dZ", static_cast<int>(ms));
    return buf;
}

}  // namespace

std::string sha256_hex(const std::string& bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 failed");
    }
    static const char* const hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

Run::Run(std::string command, std::filesystem::path out_dir)
    : command_(std::move(command)), dir_(std::move(out_dir)), started_(utc_now())
{
    std::filesystem::create_directories(dir_);
}

void Run::set_problem(const std::string& canonical_json) { problem_hash_ = sha256_hex(canonical_json); }

void Run::set_tolerances(const IntegratorConfig& c)
{
    tolerances_ = {{"rel_tol", c.rel_tol},       {"abs_tol", c.abs_tol},           {"max_step", c.max_step},
                   {"event_tol", c.event_tol},   {"initial_step", c.initial_step}, {"max_steps", c.max_steps}};
}

void Run::write(const std::string& name, const std::string& content)
{
    std::ofstream out(dir_ / name, std::ios::binary);
    out << content;
    if (!out) {
        throw std::runtime_error("cannot write " + (dir_ / name).string());
    }
    outputs_[name] = sha256_hex(content);
}

void Run::finish(int exit_code, const std::string& error)
{
    nlohmann::ordered_json m;
    m["schema"] = 1;
    m["command"] = command_;
    m["arguments"] = arguments_;
    m["problem-hash"] = problem_hash_ ? nlohmann::ordered_json(*problem_hash_) : nlohmann::ordered_json(nullptr);
    // Every algorithm is deterministic; nothing is drawn at random.
    m["seeds"] = nlohmann::ordered_json::array();
    m["tolerances"] = tolerances_.is_null() ? nlohmann::ordered_json(nullptr) : tolerances_;
    m["tool-version"] = PLAPKAM_VERSION;
    m["outputs"] = outputs_;
    m["exit-code"] = exit_code;
    m["error"] = error.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(error);
    m["manifest-hash"] = sha256_hex(m.dump());
    m["started"] = started_;
    m["finished"] = utc_now();
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << m.dump(2) << '\n';
}

}  // namespace plapkam::cli

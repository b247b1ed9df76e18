#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace transitcast::cli {

// Run record written next to every command's outputs as manifest.json.
class Manifest {
public:
    Manifest(std::string command, std::filesystem::path out_dir);

    const std::filesystem::path& out_dir() const noexcept { return out_dir_; }

    void set_config(nlohmann::json config) { config_ = std::move(config); }
    void set_seed(std::uint64_t seed) { seed_ = seed; }
    void add_input(const std::filesystem::path& path);

    // Writes `content` to out_dir/name and records it.
    void write_output(const std::string& name, const std::string& content);
    void write_json(const std::string& name, const nlohmann::json& doc);

    void write(int exit_code) const;

private:
    std::string command_;
    std::filesystem::path out_dir_;
    nlohmann::json config_ = nlohmann::json::object();
    std::uint64_t seed_{0};
    nlohmann::json inputs_ = nlohmann::json::array();
    std::vector<std::string> outputs_;
    std::chrono::system_clock::time_point started_wall_;
    std::chrono::steady_clock::time_point started_;
};

}  // namespace transitcast::cli

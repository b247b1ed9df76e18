#include "cli/manifest.hpp"

#include <ctime>
#include <fstream>

#include <Eigen/Core>

#include "transitcast/errors.hpp"

namespace transitcast::cli {

namespace {

std::string utc_timestamp(std::chrono::system_clock::time_point tp) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

Manifest::Manifest(std::string command, std::filesystem::path out_dir)
    : command_(std::move(command)),
      out_dir_(std::move(out_dir)),
      started_wall_(std::chrono::system_clock::now()),
      started_(std::chrono::steady_clock::now()) {}

void Manifest::add_input(const std::filesystem::path& path) {
    std::error_code ec;
    const auto bytes = std::filesystem::file_size(path, ec);
    inputs_.push_back({{"path", path.string()}, {"bytes", ec ? nlohmann::json() : nlohmann::json(bytes)}});
}

void Manifest::write_output(const std::string& name, const std::string& content) {
    std::filesystem::create_directories(out_dir_);
    const auto path = out_dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw InputError("failed writing '" + path.string() + "'");
    outputs_.push_back(name);
}

void Manifest::write_json(const std::string& name, const nlohmann::json& doc) {
    write_output(name, doc.dump(2) + "\n");
}

void Manifest::write(int exit_code) const {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    nlohmann::json doc;
    doc["command"] = command_;
    doc["exit_code"] = exit_code;
    doc["seed"] = seed_;
    doc["config"] = config_;
    doc["inputs"] = inputs_;
    doc["outputs"] = outputs_;
    doc["versions"] = {{"transitcast", TRANSITCAST_VERSION},
                       {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                     std::to_string(EIGEN_MINOR_VERSION)},
                       {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                             std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                             std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    doc["timings"] = {{"started_utc", utc_timestamp(started_wall_)}, {"elapsed_seconds", elapsed}};
    std::filesystem::create_directories(out_dir_);
    std::ofstream out(out_dir_ / "manifest.json", std::ios::binary);
    out << doc.dump(2) << "\n";
}

}  // namespace transitcast::cli

#pragma once

#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace transitcast::cli {

// Binds command-line options to variables and layers a JSON config file
// underneath them: flags given on the command line win, then the config
// file (top-level keys, then the section named after the command), then
// the built-in defaults.
class OptionSet {
public:
    explicit OptionSet(CLI::App& app) : app_(&app) {}

    template <class T>
    CLI::Option* add(const std::string& key, T& target, const std::string& help) {
        auto* opt = app_->add_option("--" + key, target, help)->capture_default_str();
        entries_.push_back(Entry{key, opt, [&target](const nlohmann::json& j) { target = j.get<T>(); },
                                 [&target] { return nlohmann::json(target); }});
        return opt;
    }

    CLI::Option* add_flag(const std::string& key, bool& target, const std::string& help);

    // Throws ArgumentError for unknown keys in the command section or for
    // values of the wrong type.
    void apply(const nlohmann::json& config, const std::string& section);

    // Every option's final value, keyed by name.
    nlohmann::json effective() const;

private:
    struct Entry {
        std::string key;
        CLI::Option* option;
        std::function<void(const nlohmann::json&)> assign;
        std::function<nlohmann::json()> value;
    };

    void assign(const Entry& entry, const nlohmann::json& value) const;

    CLI::App* app_;
    std::vector<Entry> entries_;
};

// Reads a JSON config file; an empty path yields an empty object.
nlohmann::json load_config(const std::string& path);

}  // namespace transitcast::cli

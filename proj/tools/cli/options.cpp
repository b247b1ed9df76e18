#include "cli/options.hpp"

#include <fstream>

#include "transitcast/errors.hpp"

namespace transitcast::cli {

CLI::Option* OptionSet::add_flag(const std::string& key, bool& target, const std::string& help) {
    auto* opt = app_->add_flag("--" + key, target, help);
    entries_.push_back(Entry{key, opt, [&target](const nlohmann::json& j) { target = j.get<bool>(); },
                             [&target] { return nlohmann::json(target); }});
    return opt;
}

void OptionSet::assign(const Entry& entry, const nlohmann::json& value) const {
    try {
        entry.assign(value);
    } catch (const nlohmann::json::exception& e) {
        throw ArgumentError("config key '" + entry.key + "': " + e.what());
    }
}

void OptionSet::apply(const nlohmann::json& config, const std::string& section) {
    if (!config.is_object()) throw ArgumentError("config file must hold a JSON object");
    const nlohmann::json* scoped = nullptr;
    if (config.contains(section)) {
        scoped = &config.at(section);
        if (!scoped->is_object()) throw ArgumentError("config section '" + section + "' must be an object");
        for (const auto& [key, value] : scoped->items()) {
            const bool known = std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.key == key; });
            if (!known) throw ArgumentError("unknown key '" + key + "' in config section '" + section + "'");
        }
    }
    for (const auto& entry : entries_) {
        if (entry.option->count() > 0) continue;
        if (scoped && scoped->contains(entry.key)) {
            assign(entry, scoped->at(entry.key));
        } else if (config.contains(entry.key) && !config.at(entry.key).is_object()) {
            assign(entry, config.at(entry.key));
        }
    }
}

nlohmann::json OptionSet::effective() const {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& entry : entries_) out[entry.key] = entry.value();
    return out;
}

nlohmann::json load_config(const std::string& path) {
    if (path.empty()) return nlohmann::json::object();
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError("config file '" + path + "': " + e.what());
    }
}

}  // namespace transitcast::cli

// Copyright 2026 The nadir authors
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not
// use this file except in compliance with the License. You may obtain a copy
// of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nadir/dataset.hpp"
#include "nadir/mission.hpp"

namespace nadir {

/// Resolved run configuration. Field defaults are the built-in layer;
/// a config file overrides them and command-line flags override both.
struct Config {
    std::string coords;                 // grammar string or a file path
    double fov_deg = 78.8;
    int aspect_w = 4;
    int aspect_h = 3;
    std::string map_type = "satellite";
    std::string data_dir = "datasets";
    std::string mission_name;           // empty: derived from the coords
    double vmargin = 0.2;
    int img_w = 0;                      // 0 keeps the native capture size
    int img_h = 0;
    int img_c = 0;
    double overlap = 0.0;
    int seed = 2024;
    int retry = 3;
    int concurrency = 4;
    double entropy_threshold = 2.1;
    std::string provider = "google";    // or "mock"
    double mock_density = 0.5;
    std::string stepping = "truncate";  // or "cover"
    std::string api_key;                // resolved separately, never echoed
    bool hide_labels = true;
    bool dry_run = false;
};

namespace detail {

inline void apply_config_layer(Config& cfg, const nlohmann::json& j, const char* origin) {
    std::vector<std::string> unknown;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "coords") cfg.coords = value.get<std::string>();
            else if (key == "fov") cfg.fov_deg = value.get<double>();
            else if (key == "aspect_w") cfg.aspect_w = value.get<int>();
            else if (key == "aspect_h") cfg.aspect_h = value.get<int>();
            else if (key == "map_type") cfg.map_type = value.get<std::string>();
            else if (key == "data_dir") cfg.data_dir = value.get<std::string>();
            else if (key == "mission_name") cfg.mission_name = value.get<std::string>();
            else if (key == "vmargin") cfg.vmargin = value.get<double>();
            else if (key == "img_size") {
                const auto v = value.get<std::vector<int>>();
                if (v.size() != 2 && v.size() != 3) {
                    throw ConfigError(std::string(origin) +
                                      ": img_size must be [w, h] or [w, h, c]");
                }
                cfg.img_w = v[0];
                cfg.img_h = v[1];
                cfg.img_c = v.size() == 3 ? v[2] : 0;
            }
            else if (key == "overlap") cfg.overlap = value.get<double>();
            else if (key == "seed") cfg.seed = value.get<int>();
            else if (key == "retry") cfg.retry = value.get<int>();
            else if (key == "concurrency") cfg.concurrency = value.get<int>();
            else if (key == "entropy_threshold") cfg.entropy_threshold = value.get<double>();
            else if (key == "provider") cfg.provider = value.get<std::string>();
            else if (key == "mock_density") cfg.mock_density = value.get<double>();
            else if (key == "stepping") cfg.stepping = value.get<std::string>();
            else if (key == "api_key") cfg.api_key = value.get<std::string>();
            else if (key == "hide_labels") cfg.hide_labels = value.get<bool>();
            else unknown.push_back(key);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string(origin) + ": bad value for '" + key + "': " + e.what());
        }
    }
    if (!unknown.empty()) {
        std::string msg = std::string(origin) + ": unknown key";
        if (unknown.size() > 1) msg += 's';
        for (size_t i = 0; i < unknown.size(); ++i) {
            msg += (i ? ", '" : " '") + unknown[i] + "'";
        }
        throw ConfigError(msg);
    }
}

}  // namespace detail

/// Builds the effective configuration: built-in defaults, then the optional
/// JSON config file, then command-line overrides. Unknown file keys are an
/// error naming each offender.
inline Config resolve_config(const nlohmann::json& cli_overrides,
                             const std::optional<std::filesystem::path>& config_file) {
    Config cfg;
    if (config_file) {
        std::ifstream in(*config_file);
        if (!in) throw IoError("cannot open config file '" + config_file->string() + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("config file '" + config_file->string() + "': " + e.what());
        }
        if (!j.is_object()) {
            throw ParseError("config file '" + config_file->string() + "' must hold a JSON object");
        }
        detail::apply_config_layer(cfg, j, "config file");
    }
    detail::apply_config_layer(cfg, cli_overrides, "command line");
    return cfg;
}

inline void validate_config(const Config& cfg) {
    if (!(cfg.fov_deg > 0.0) || !(cfg.fov_deg < 180.0)) {
        throw ConfigError("fov must lie in (0, 180)");
    }
    if (cfg.aspect_w <= 0 || cfg.aspect_h <= 0) throw ConfigError("aspect ratio must be positive");
    if (!(cfg.vmargin >= 0.0) || !(cfg.vmargin < 1.0)) throw ConfigError("vmargin must lie in [0, 1)");
    if (!(cfg.overlap >= 0.0) || !(cfg.overlap < 1.0)) throw ConfigError("overlap must lie in [0, 1)");
    if (cfg.retry < 0) throw ConfigError("retry must be >= 0");
    if (cfg.concurrency < 1) throw ConfigError("concurrency must be >= 1");
    if (!(cfg.entropy_threshold >= 0.0) || !(cfg.entropy_threshold <= 8.0)) {
        throw ConfigError("entropy_threshold must lie in [0, 8]");
    }
    if (cfg.provider != "google" && cfg.provider != "mock") {
        throw ConfigError("provider must be google or mock");
    }
    if (!(cfg.mock_density >= 0.0) || !(cfg.mock_density <= 1.0)) {
        throw ConfigError("mock_density must lie in [0, 1]");
    }
    if (cfg.img_w < 0 || cfg.img_h < 0 || (cfg.img_w == 0) != (cfg.img_h == 0)) {
        throw ConfigError("img size needs both width and height (or neither)");
    }
    if (cfg.img_c != 0 && cfg.img_c != 1 && cfg.img_c != 3) {
        throw ConfigError("img channels must be 1 or 3");
    }
    map_type_from_string(cfg.map_type);
    stepping_from_string(cfg.stepping);
}

inline constexpr const char* kApiKeyEnvVar = "NADIR_MAPS_API_KEY";
inline constexpr const char* kSecretsFile = "secrets.json";

/// API key precedence: explicit value, then the environment variable, then
/// {"api_key": ...} in ./secrets.json. Empty result means "no key".
inline std::string resolve_api_key(const std::string& explicit_key,
                                   const std::filesystem::path& secrets = kSecretsFile) {
    if (!explicit_key.empty()) return explicit_key;
    if (const char* env = std::getenv(kApiKeyEnvVar); env && *env) return env;
    std::ifstream in(secrets);
    if (in) {
        try {
            nlohmann::json j;
            in >> j;
            if (j.is_object() && j.contains("api_key") && j["api_key"].is_string()) {
                return j["api_key"].get<std::string>();
            }
        } catch (const nlohmann::json::exception&) {
            // Unreadable secrets file is the same as no secrets file.
        }
    }
    return {};
}

/// Echo of the run configuration. The API key never appears: its slot says
/// only whether one was present.
inline ordered_json config_echo(const Config& cfg) {
    ordered_json j;
    j["coords"] = cfg.coords;
    j["fov"] = cfg.fov_deg;
    j["aspect_w"] = cfg.aspect_w;
    j["aspect_h"] = cfg.aspect_h;
    j["map_type"] = cfg.map_type;
    j["data_dir"] = cfg.data_dir;
    j["mission_name"] = cfg.mission_name;
    j["vmargin"] = cfg.vmargin;
    j["img_size"] = ordered_json::array();
    if (cfg.img_w > 0) {
        j["img_size"] = {cfg.img_w, cfg.img_h};
        if (cfg.img_c > 0) j["img_size"].push_back(cfg.img_c);
    }
    j["overlap"] = cfg.overlap;
    j["seed"] = cfg.seed;
    j["retry"] = cfg.retry;
    j["concurrency"] = cfg.concurrency;
    j["entropy_threshold"] = cfg.entropy_threshold;
    j["provider"] = cfg.provider;
    j["mock_density"] = cfg.mock_density;
    j["stepping"] = cfg.stepping;
    j["api_key"] = cfg.api_key.empty() ? "" : "<redacted>";
    j["hide_labels"] = cfg.hide_labels;
    return j;
}

}  // namespace nadir

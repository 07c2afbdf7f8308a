/*
 * acr: adaptive coordinate-based regression loss for face alignment
 *
 * Copyright 2026 The acr authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "acr/config.hpp"

#include "acr/errors.hpp"
#include "acr/numfmt.hpp"

#include <fstream>
#include <sstream>

namespace acr {

KeyValueConfig KeyValueConfig::parse(std::string_view text)
{
    KeyValueConfig cfg;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = numfmt::trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError(line_no, "expected 'key = value'");
        }
        const auto key = numfmt::trim(line.substr(0, eq));
        if (key.empty()) {
            throw ParseError(line_no, "empty key");
        }
        if (!cfg.values_.emplace(std::string(key), std::string(numfmt::trim(line.substr(eq + 1)))).second) {
            throw ParseError(line_no, "duplicate key '" + std::string(key) + "'");
        }
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path)
{
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw IoError("cannot open config '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << file.rdbuf();
    try {
        return parse(buffer.str());
    } catch (const ParseError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const
{
    const auto it = values_.find(key);
    if (it == values_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void KeyValueConfig::set(const std::string& key, std::string value)
{
    values_[key] = std::move(value);
}

} // namespace acr

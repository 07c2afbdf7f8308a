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
#pragma once

#ifndef ACR_CONFIG_HPP
#define ACR_CONFIG_HPP

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace acr {

/**
 * Flat `key = value` document. '#' starts a comment, blank lines are
 * ignored, later keys override earlier ones.
 */
class KeyValueConfig
{
public:
    static KeyValueConfig parse(std::string_view text);
    static KeyValueConfig load(const std::string& path);

    std::optional<std::string> get(const std::string& key) const;
    void set(const std::string& key, std::string value);
    bool contains(const std::string& key) const { return values_.contains(key); }
    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

} // namespace acr

#endif // ACR_CONFIG_HPP

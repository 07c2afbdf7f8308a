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

#ifndef ACR_NUMFMT_HPP
#define ACR_NUMFMT_HPP

#include <optional>
#include <string>
#include <string_view>

// Locale-independent number formatting and parsing. Everything the library
// writes to disk goes through these so that outputs are byte-stable and always
// use '.' as the decimal separator.
namespace acr::numfmt {

/// General format at 17 significant digits; re-parses to the same bits.
std::string exact(double value);

/// Fixed notation with the given number of decimals.
std::string fixed(double value, int decimals);

/// Parses a whole token as a double; nullopt on trailing garbage or empty input.
std::optional<double> parse_double(std::string_view token);

std::optional<long long> parse_int(std::string_view token);

std::string_view trim(std::string_view s);

} // namespace acr::numfmt

#endif // ACR_NUMFMT_HPP

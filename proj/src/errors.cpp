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
#include "acr/errors.hpp"

namespace acr {

ParseError::ParseError(std::size_t line, const std::string& what)
    : Error(Kind::parse, line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line)
{
}

int exit_code_for(Error::Kind kind) noexcept
{
    switch (kind) {
    case Error::Kind::config:
        return 2;
    case Error::Kind::parse:
        return 3;
    case Error::Kind::numerical:
        return 4;
    case Error::Kind::invalid_input:
    case Error::Kind::insufficient_data:
    case Error::Kind::degenerate_geometry:
        return 5;
    case Error::Kind::io:
        return 6;
    }
    return 1;
}

} // namespace acr

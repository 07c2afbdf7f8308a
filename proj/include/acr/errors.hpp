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

#ifndef ACR_ERRORS_HPP
#define ACR_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace acr {

/**
 * Base class of all errors raised by the library. Every error carries a
 * category so that front ends (the CLI, the Python module) can map it to an
 * exit code or exception type without string matching.
 */
class Error : public std::runtime_error
{
public:
    enum class Kind { invalid_input, insufficient_data, numerical, parse, degenerate_geometry, config, io };

    Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

class InvalidInputError : public Error
{
public:
    explicit InvalidInputError(const std::string& what) : Error(Kind::invalid_input, what) {}
};

class InsufficientDataError : public Error
{
public:
    explicit InsufficientDataError(const std::string& what) : Error(Kind::insufficient_data, what) {}
};

class NumericalError : public Error
{
public:
    explicit NumericalError(const std::string& what) : Error(Kind::numerical, what) {}
};

class DegenerateGeometryError : public Error
{
public:
    explicit DegenerateGeometryError(const std::string& what) : Error(Kind::degenerate_geometry, what) {}
};

class ConfigError : public Error
{
public:
    explicit ConfigError(const std::string& what) : Error(Kind::config, what) {}
};

class IoError : public Error
{
public:
    explicit IoError(const std::string& what) : Error(Kind::io, what) {}
};

/// Parse failure; line() is 1-based, 0 when the error is not tied to a line.
class ParseError : public Error
{
public:
    ParseError(std::size_t line, const std::string& what);

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Process exit code used by the CLI for each error category.
int exit_code_for(Error::Kind kind) noexcept;

} // namespace acr

#endif // ACR_ERRORS_HPP

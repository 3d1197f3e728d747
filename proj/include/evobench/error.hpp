/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace evobench {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration, bad arguments or an otherwise invalid request.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A record in a source file could not be parsed. Carries the 1-based line.
class IngestionError : public Error {
 public:
  IngestionError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Source or column unavailable at query time.
class CatalogError : public Error {
 public:
  using Error::Error;
};

class PlanError : public Error {
 public:
  using Error::Error;
};

/// A workload parameter referenced by a plan builder has no value.
class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& name)
      : Error("missing parameter '" + name + "'"), name_(name) {}

  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// A workload query failed during a benchmark run.
class RunError : public Error {
 public:
  RunError(int analyst, int version, const std::string& what)
      : Error("analyst " + std::to_string(analyst) + " version " + std::to_string(version) + ": " + what),
        analyst_(analyst),
        version_(version) {}

  int analyst() const { return analyst_; }
  int version() const { return version_; }

 private:
  int analyst_;
  int version_;
};

}  // namespace evobench

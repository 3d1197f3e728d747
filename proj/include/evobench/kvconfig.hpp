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

#include <filesystem>
#include <map>
#include <string>

namespace evobench {

/// Parses "name = number" lines. '#' starts a comment; blank lines are skipped.
/// Throws ValidationError naming the offending line.
std::map<std::string, double> parse_kv_numbers(const std::string& text);
std::map<std::string, double> read_kv_file(const std::filesystem::path& path);
std::string format_kv_numbers(const std::map<std::string, double>& values);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace evobench

// switchsound/textio.h

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SWITCHSOUND_TEXTIO_H_
#define SWITCHSOUND_TEXTIO_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace switchsound {

// Shortest decimal form that round-trips a double exactly (%.17g fallback).
std::string format_double(double v);
double parse_double(const std::string& s);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

std::vector<std::string> split(std::string_view s, char delim);
std::string trim(std::string_view s);

std::uint64_t fnv1a64(std::string_view s);
std::string to_hex(std::uint64_t v);

// Flat "[section] / key = value" file, the format used for configuration and
// corpus specs. Comments start with '#'. Values stay as raw strings.
using TomlLite = std::map<std::string, std::map<std::string, std::string>>;
TomlLite parse_toml_lite(std::string_view text);
TomlLite parse_toml_lite_file(const std::filesystem::path& path);

}  // namespace switchsound

#endif  // SWITCHSOUND_TEXTIO_H_

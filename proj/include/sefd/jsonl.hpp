#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace sefd::jsonl {

using Json = nlohmann::json;

// Calls `fn(record, line_number)` for every non-blank line of `path`.
// Line numbers are 1-based. Parse failures and exceptions thrown by `fn`
// are rethrown as InputError prefixed with "path:line: ".
void for_each_record(const std::string& path,
                     const std::function<void(const Json&, std::size_t)>& fn);

void for_each_record(std::istream& in, const std::string& label,
                     const std::function<void(const Json&, std::size_t)>& fn);

std::vector<Json> read_all(const std::string& path);

// Writes one compact JSON object per line. Throws InputError if the file
// cannot be opened or a write fails.
void write_all(const std::string& path, const std::vector<Json>& records);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& value);

// Typed field accessors that raise InputError naming the missing/mistyped key.
double require_number(const Json& record, const char* key);
std::string require_string(const Json& record, const char* key);

}  // namespace sefd::jsonl

#include "sefd/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "sefd/errors.hpp"

namespace sefd::jsonl {

namespace {

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace

void for_each_record(std::istream& in, const std::string& label,
                     const std::function<void(const Json&, std::size_t)>& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    Json record;
    try {
      record = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw InputError(label + ":" + std::to_string(line_no) + ": malformed JSON (" +
                       e.what() + ")");
    }
    try {
      fn(record, line_no);
    } catch (const InputError& e) {
      throw InputError(label + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Json::exception& e) {
      throw InputError(label + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void for_each_record(const std::string& path,
                     const std::function<void(const Json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "' for reading");
  for_each_record(in, path, fn);
}

std::vector<Json> read_all(const std::string& path) {
  std::vector<Json> out;
  for_each_record(path, [&](const Json& r, std::size_t) { out.push_back(r); });
  return out;
}

void write_all(const std::string& path, const std::vector<Json>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  for (const auto& r : records) out << r.dump() << '\n';
  if (!out) throw InputError("write to '" + path + "' failed");
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "' for reading");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": malformed JSON (" + e.what() + ")");
  }
}

void write_json_file(const std::string& path, const Json& value) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << value.dump(2) << '\n';
  if (!out) throw InputError("write to '" + path + "' failed");
}

double require_number(const Json& record, const char* key) {
  auto it = record.find(key);
  if (it == record.end() || !it->is_number()) {
    throw InputError(std::string("missing or non-numeric field '") + key + "'");
  }
  return it->get<double>();
}

std::string require_string(const Json& record, const char* key) {
  auto it = record.find(key);
  if (it == record.end() || !it->is_string()) {
    throw InputError(std::string("missing or non-string field '") + key + "'");
  }
  return it->get<std::string>();
}

}  // namespace sefd::jsonl

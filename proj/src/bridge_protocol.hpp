#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sefd/errors.hpp"

namespace sefd::bridge {

// Decodes one {"request_id", "vector"|"error"} response. A worker-reported
// error is per-text (MissingDataError); anything else wrong with the reply is
// a protocol failure.
inline std::vector<double> decode_response(const nlohmann::json& resp,
                                           const std::string& expected_id,
                                           std::optional<std::size_t> dimension) {
  if (!resp.is_object()) throw Error("bridge response is not a JSON object");
  auto rid = resp.find("request_id");
  if (rid == resp.end() || !rid->is_string() || rid->get<std::string>() != expected_id) {
    throw Error("bridge response out of order: expected request_id '" + expected_id + "'");
  }
  if (auto err = resp.find("error"); err != resp.end()) {
    throw MissingDataError("encoder rejected id '" + expected_id + "': " +
                           (err->is_string() ? err->get<std::string>() : err->dump()));
  }
  auto vec = resp.find("vector");
  if (vec == resp.end() || !vec->is_array()) throw Error("bridge response lacks 'vector'");
  std::vector<double> v;
  try {
    v = vec->get<std::vector<double>>();
  } catch (const nlohmann::json::exception&) {
    throw Error("bridge vector for '" + expected_id + "' is not numeric");
  }
  if (dimension && v.size() != *dimension) {
    throw InputError("bridge returned d=" + std::to_string(v.size()) + " but announced d=" +
                     std::to_string(*dimension));
  }
  for (double x : v) {
    if (!std::isfinite(x)) throw Error("bridge returned a non-finite vector for '" + expected_id + "'");
  }
  return v;
}

inline nlohmann::json request(const std::string& request_id, const std::string& text) {
  return {{"request_id", request_id}, {"text", text}};
}

}  // namespace sefd::bridge

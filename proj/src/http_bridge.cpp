#include <httplib.h>

#include "bridge_protocol.hpp"
#include "sefd/embedding_provider.hpp"
#include "sefd/errors.hpp"

namespace sefd {

HttpBridgeProvider::HttpBridgeProvider(std::string base_url) : base_url_(std::move(base_url)) {
  httplib::Client cli(base_url_);
  auto res = cli.Get("/health");
  if (!res || res->status != 200) {
    throw Error("encoder bridge at " + base_url_ + " is not healthy");
  }
  auto body = nlohmann::json::parse(res->body, nullptr, false);
  if (body.is_object()) {
    if (auto it = body.find("dimension"); it != body.end() && it->is_number_integer() &&
                                          it->get<long long>() > 0) {
      dimension_ = it->get<std::size_t>();
    }
  }
}

std::vector<double> HttpBridgeProvider::embed(const CandidateText& text) {
  httplib::Client cli(base_url_);
  const auto body = bridge::request(text.id, text.text).dump();
  auto res = cli.Post("/embed", body, "application/json");
  if (!res) throw Error("HTTP bridge request failed for id '" + text.id + "'");
  auto v = bridge::decode_response(nlohmann::json::parse(res->body, nullptr, false), text.id, dimension_);
  if (!dimension_) dimension_ = v.size();
  return v;
}

}  // namespace sefd

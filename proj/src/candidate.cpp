#include "sefd/candidate.hpp"

#include <charconv>
#include <unordered_set>

#include "sefd/errors.hpp"
#include "sefd/jsonl.hpp"

namespace sefd {

std::string TruthLabel::to_string() const {
  switch (kind) {
    case Kind::Human:
      return "human";
    case Kind::LLM:
      return "llm";
    case Kind::Paraphrase:
      return "paraphrase-" + std::to_string(depth);
  }
  return "unknown";
}

TruthLabel TruthLabel::parse(const std::string& s) {
  if (s == "human") return human();
  if (s == "llm") return llm();
  static constexpr std::string_view kPrefix = "paraphrase-";
  if (s.rfind(kPrefix, 0) == 0) {
    int k = 0;
    const char* first = s.data() + kPrefix.size();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, k);
    if (ec == std::errc() && ptr == last && k >= 1) return paraphrase(k);
  }
  throw InputError("unknown truth label '" + s +
                   "' (expected human, llm or paraphrase-<k>)");
}

nlohmann::json to_json(const CandidateText& c) {
  nlohmann::json j;
  j["id"] = c.id;
  if (!c.text.empty()) j["text"] = c.text;
  if (c.truth) j["truth"] = c.truth->to_string();
  if (c.parent_id) j["parent_id"] = *c.parent_id;
  if (c.raw_score) j["raw_score"] = *c.raw_score;
  if (c.embedding) j["embedding"] = *c.embedding;
  return j;
}

CandidateText candidate_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("record is not a JSON object");
  CandidateText c;
  c.id = jsonl::require_string(j, "id");
  if (auto it = j.find("text"); it != j.end() && !it->is_null()) {
    c.text = it->get<std::string>();
  }
  if (auto it = j.find("truth"); it != j.end() && !it->is_null()) {
    c.truth = TruthLabel::parse(it->get<std::string>());
  }
  if (auto it = j.find("parent_id"); it != j.end() && !it->is_null()) {
    c.parent_id = it->get<std::string>();
  }
  if (auto it = j.find("raw_score"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) throw InputError("field 'raw_score' is not a number");
    c.raw_score = it->get<double>();
  }
  if (auto it = j.find("embedding"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw InputError("field 'embedding' is not an array");
    c.embedding = it->get<std::vector<double>>();
  }
  return c;
}

std::vector<CandidateText> read_stream(const std::string& path) {
  std::vector<CandidateText> out;
  std::unordered_set<std::string> seen;
  jsonl::for_each_record(path, [&](const jsonl::Json& r, std::size_t) {
    auto c = candidate_from_json(r);
    if (!seen.insert(c.id).second) throw InputError("duplicate id '" + c.id + "'");
    out.push_back(std::move(c));
  });
  return out;
}

void write_stream(const std::string& path, const std::vector<CandidateText>& stream) {
  std::vector<nlohmann::json> records;
  records.reserve(stream.size());
  for (const auto& c : stream) records.push_back(to_json(c));
  jsonl::write_all(path, records);
}

}  // namespace sefd

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace sefd {

// Ground-truth source of a text. Evaluation-only: nothing in scoring, fusion
// or the pool update reads it.
struct TruthLabel {
  enum class Kind { Human, LLM, Paraphrase };

  Kind kind = Kind::Human;
  int depth = 0;  // paraphrase depth k >= 1; 0 otherwise

  static TruthLabel human() { return {Kind::Human, 0}; }
  static TruthLabel llm() { return {Kind::LLM, 0}; }
  static TruthLabel paraphrase(int k) { return {Kind::Paraphrase, k}; }

  bool is_positive() const { return kind != Kind::Human; }

  // "human", "llm", "paraphrase-<k>"
  std::string to_string() const;
  static TruthLabel parse(const std::string& s);

  friend bool operator==(const TruthLabel&, const TruthLabel&) = default;
  friend auto operator<=>(const TruthLabel&, const TruthLabel&) = default;
};

// One element of the input sequence.
struct CandidateText {
  std::string id;
  std::string text;
  std::optional<TruthLabel> truth;
  std::optional<std::string> parent_id;  // direct ancestor of a paraphrase
  std::optional<double> raw_score;
  std::optional<std::vector<double>> embedding;
};

nlohmann::json to_json(const CandidateText& c);
CandidateText candidate_from_json(const nlohmann::json& j);

// Reads a line-delimited stream; ids must be unique.
std::vector<CandidateText> read_stream(const std::string& path);
void write_stream(const std::string& path, const std::vector<CandidateText>& stream);

}  // namespace sefd

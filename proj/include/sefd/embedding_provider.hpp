#pragma once

#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <sys/types.h>

#include "sefd/candidate.hpp"

namespace sefd {

// Source of embeddings for texts that do not carry one inline.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  // Throws MissingDataError when the text cannot be embedded.
  virtual std::vector<double> embed(const CandidateText& text) = 0;
  // Announced dimension, when the provider knows it up front.
  virtual std::optional<std::size_t> dimension() const { return std::nullopt; }
};

// Lookup over a line-delimited {"id", "vector"} file.
class FileEmbeddingProvider final : public EmbeddingProvider {
 public:
  static FileEmbeddingProvider load(const std::string& path);

  std::vector<double> embed(const CandidateText& text) override;
  std::optional<std::size_t> dimension() const override { return dimension_; }

 private:
  std::unordered_map<std::string, std::vector<double>> vectors_;
  std::optional<std::size_t> dimension_;
};

// Client for an encoder worker speaking line-delimited JSON over stdio.
//
// The worker is started with `/bin/sh -c <command>`. Its first output line
// must be {"dimension": d}. Requests are {"request_id", "text"}; responses
// are {"request_id", "vector"} or {"request_id", "error"}, in request order.
class StdioBridgeProvider final : public EmbeddingProvider {
 public:
  explicit StdioBridgeProvider(const std::string& command);
  ~StdioBridgeProvider() override;

  StdioBridgeProvider(const StdioBridgeProvider&) = delete;
  StdioBridgeProvider& operator=(const StdioBridgeProvider&) = delete;

  std::vector<double> embed(const CandidateText& text) override;
  std::optional<std::size_t> dimension() const override { return dimension_; }

  // Pipelines every request before reading any response. Per-request errors
  // come back as nullopt with the worker's message in `errors` (if given).
  std::vector<std::optional<std::vector<double>>> embed_batch(
      std::span<const CandidateText> texts, std::vector<std::string>* errors = nullptr);

 private:
  void handshake();
  void shutdown();
  void send(const std::string& request_id, const std::string& text);
  std::string read_line();

  pid_t pid_ = -1;
  std::FILE* to_child_ = nullptr;
  std::FILE* from_child_ = nullptr;
  std::size_t dimension_ = 0;
};

// Client for the same worker in HTTP mode: POST /embed, GET /health.
class HttpBridgeProvider final : public EmbeddingProvider {
 public:
  // `base_url` like "http://127.0.0.1:8765". Probes /health on construction.
  explicit HttpBridgeProvider(std::string base_url);

  std::vector<double> embed(const CandidateText& text) override;
  std::optional<std::size_t> dimension() const override { return dimension_; }

 private:
  std::string base_url_;
  std::optional<std::size_t> dimension_;
};

}  // namespace sefd

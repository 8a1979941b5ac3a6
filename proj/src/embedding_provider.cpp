#include "sefd/embedding_provider.hpp"

#include <cerrno>
#include <cmath>
#include <cstring>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include "bridge_protocol.hpp"
#include "sefd/errors.hpp"
#include "sefd/jsonl.hpp"

namespace sefd {

FileEmbeddingProvider FileEmbeddingProvider::load(const std::string& path) {
  FileEmbeddingProvider p;
  jsonl::for_each_record(path, [&](const jsonl::Json& r, std::size_t) {
    auto id = jsonl::require_string(r, "id");
    auto it = r.find("vector");
    if (it == r.end() || !it->is_array()) throw InputError("record lacks a 'vector' array");
    auto v = it->get<std::vector<double>>();
    if (p.dimension_ && v.size() != *p.dimension_) {
      throw InputError("embedding dimension mismatch: expected d=" +
                       std::to_string(*p.dimension_) + ", got d=" + std::to_string(v.size()));
    }
    p.dimension_ = v.size();
    if (!p.vectors_.emplace(std::move(id), std::move(v)).second) {
      throw InputError("duplicate id in embeddings file");
    }
  });
  return p;
}

std::vector<double> FileEmbeddingProvider::embed(const CandidateText& text) {
  auto it = vectors_.find(text.id);
  if (it == vectors_.end()) throw MissingDataError("no embedding for id '" + text.id + "'");
  return it->second;
}

StdioBridgeProvider::StdioBridgeProvider(const std::string& command) {
  int in_pipe[2];   // parent -> child stdin
  int out_pipe[2];  // child stdout -> parent
  if (pipe(in_pipe) != 0) throw Error(std::string("pipe: ") + std::strerror(errno));
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw Error(std::string("pipe: ") + std::strerror(errno));
  }
  pid_ = fork();
  if (pid_ < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    throw Error(std::string("fork: ") + std::strerror(errno));
  }
  if (pid_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
  fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);
  to_child_ = fdopen(in_pipe[1], "w");
  from_child_ = fdopen(out_pipe[0], "r");

  try {
    handshake();
  } catch (...) {
    shutdown();
    throw;
  }
}

void StdioBridgeProvider::handshake() {
  const std::string first = read_line();
  const auto hello = nlohmann::json::parse(first, nullptr, false);
  auto it = hello.is_object() ? hello.find("dimension") : hello.end();
  if (it == hello.end() || !it->is_number_integer() || it->get<long long>() <= 0) {
    throw Error("encoder bridge handshake failed: " + first);
  }
  dimension_ = it->get<std::size_t>();
}

StdioBridgeProvider::~StdioBridgeProvider() { shutdown(); }

void StdioBridgeProvider::shutdown() {
  // Closing stdin is the worker's cue to exit.
  if (to_child_) std::fclose(to_child_);
  if (from_child_) std::fclose(from_child_);
  to_child_ = from_child_ = nullptr;
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

std::string StdioBridgeProvider::read_line() {
  std::string line;
  int ch;
  while ((ch = std::fgetc(from_child_)) != EOF) {
    if (ch == '\n') return line;
    line.push_back(static_cast<char>(ch));
  }
  if (!line.empty()) return line;
  throw Error("encoder bridge closed its output");
}

void StdioBridgeProvider::send(const std::string& request_id, const std::string& text) {
  const std::string line = bridge::request(request_id, text).dump() + "\n";
  if (std::fwrite(line.data(), 1, line.size(), to_child_) != line.size()) {
    throw Error("write to encoder bridge failed");
  }
}

std::vector<double> StdioBridgeProvider::embed(const CandidateText& text) {
  send(text.id, text.text);
  if (std::fflush(to_child_) != 0) throw Error("write to encoder bridge failed");
  return bridge::decode_response(nlohmann::json::parse(read_line(), nullptr, false), text.id, dimension_);
}

std::vector<std::optional<std::vector<double>>> StdioBridgeProvider::embed_batch(
    std::span<const CandidateText> texts, std::vector<std::string>* errors) {
  // Chunked so neither pipe buffer fills while the worker blocks on us.
  constexpr std::size_t kChunk = 64;
  std::vector<std::optional<std::vector<double>>> out;
  out.reserve(texts.size());
  if (errors) errors->assign(texts.size(), {});
  for (std::size_t start = 0; start < texts.size(); start += kChunk) {
    const std::size_t end = std::min(texts.size(), start + kChunk);
    for (std::size_t i = start; i < end; ++i) send(texts[i].id, texts[i].text);
    if (std::fflush(to_child_) != 0) throw Error("write to encoder bridge failed");
    for (std::size_t i = start; i < end; ++i) {
      try {
        out.push_back(bridge::decode_response(nlohmann::json::parse(read_line(), nullptr, false),
                                      texts[i].id, dimension_));
      } catch (const MissingDataError& e) {
        if (errors) (*errors)[i] = e.what();
        out.push_back(std::nullopt);
      }
    }
  }
  return out;
}

}  // namespace sefd

#pragma once

#include <atomic>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sefd {

struct EmbeddingVector {
  std::vector<double> values;
  std::string source_id;
};

struct SimilarityResult {
  double score = 0.0;
  std::optional<std::size_t> argmax_index;  // absent iff the pool was empty
};

struct PoolStats {
  std::size_t initial_size = 0;
  std::size_t adds = 0;
  std::size_t replaces = 0;
  std::size_t queries = 0;
};

// Exact max-cosine retrieval over the embeddings of LLM-attributed texts.
//
// Vectors are stored row-major in one contiguous buffer, un-normalized, with
// their Euclidean norms cached at insert/replace time. Queries are a linear
// scan; ties keep the first maximizer in insertion order.
//
// Thread safety: any number of concurrent query_max_cosine() calls, or one
// mutating call with no concurrent readers.
class RetrievalPool {
 public:
  explicit RetrievalPool(std::size_t dimension);

  RetrievalPool(const RetrievalPool& other);
  RetrievalPool& operator=(const RetrievalPool& other);
  RetrievalPool(RetrievalPool&& other) noexcept;
  RetrievalPool& operator=(RetrievalPool&& other) noexcept;

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return norms_.size(); }
  bool empty() const { return norms_.empty(); }

  // Empty pool -> {0.0, nullopt}. Scores are clamped to [-1, 1] to absorb
  // rounding overshoot.
  SimilarityResult query_max_cosine(std::span<const double> v) const;

  void add(std::span<const double> v, std::string source_id);
  void add(const EmbeddingVector& e) { add(e.values, e.source_id); }

  void replace(std::size_t index, std::span<const double> v, std::string source_id);

  std::span<const double> vector_at(std::size_t index) const;
  const std::string& source_id_at(std::size_t index) const;
  double norm_at(std::size_t index) const { return norms_.at(index); }

  // Marks the current contents as the initial pool (M0) and zeroes the
  // mutation/query counters.
  void mark_initial();
  PoolStats stats() const;

  // Header line {"dimension": d}, then one {"source_id", "vector"} per entry.
  void save(std::ostream& out) const;
  void save(const std::string& path) const;

  // Throws InputError (with line number) on malformed records, on a header
  // whose dimension differs from `expected_dimension`, or on entries of the
  // wrong length.
  static RetrievalPool load(std::istream& in, const std::string& label,
                            std::optional<std::size_t> expected_dimension = std::nullopt);
  static RetrievalPool load(const std::string& path,
                            std::optional<std::size_t> expected_dimension = std::nullopt);

 private:
  double checked_norm(std::span<const double> v) const;

  std::size_t dimension_;
  std::vector<double> data_;
  std::vector<double> norms_;
  std::vector<std::string> ids_;
  std::size_t initial_size_ = 0;
  std::size_t adds_ = 0;
  std::size_t replaces_ = 0;
  mutable std::atomic<std::size_t> queries_{0};
};

// Cosine of two equal-length nonzero vectors; no validation.
double cosine(std::span<const double> a, std::span<const double> b);

}  // namespace sefd

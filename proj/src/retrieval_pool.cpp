#include "sefd/retrieval_pool.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "sefd/errors.hpp"
#include "sefd/jsonl.hpp"

namespace sefd {

namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double cosine(std::span<const double> a, std::span<const double> b) {
  const double ab = dot(a.data(), b.data(), a.size());
  const double aa = dot(a.data(), a.data(), a.size());
  const double bb = dot(b.data(), b.data(), b.size());
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

RetrievalPool::RetrievalPool(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw InputError("retrieval pool dimension must be positive");
}

RetrievalPool::RetrievalPool(const RetrievalPool& other)
    : dimension_(other.dimension_),
      data_(other.data_),
      norms_(other.norms_),
      ids_(other.ids_),
      initial_size_(other.initial_size_),
      adds_(other.adds_),
      replaces_(other.replaces_),
      queries_(other.queries_.load(std::memory_order_relaxed)) {}

RetrievalPool& RetrievalPool::operator=(const RetrievalPool& other) {
  if (this != &other) {
    RetrievalPool copy(other);
    *this = std::move(copy);
  }
  return *this;
}

RetrievalPool::RetrievalPool(RetrievalPool&& other) noexcept
    : dimension_(other.dimension_),
      data_(std::move(other.data_)),
      norms_(std::move(other.norms_)),
      ids_(std::move(other.ids_)),
      initial_size_(other.initial_size_),
      adds_(other.adds_),
      replaces_(other.replaces_),
      queries_(other.queries_.load(std::memory_order_relaxed)) {}

RetrievalPool& RetrievalPool::operator=(RetrievalPool&& other) noexcept {
  dimension_ = other.dimension_;
  data_ = std::move(other.data_);
  norms_ = std::move(other.norms_);
  ids_ = std::move(other.ids_);
  initial_size_ = other.initial_size_;
  adds_ = other.adds_;
  replaces_ = other.replaces_;
  queries_.store(other.queries_.load(std::memory_order_relaxed), std::memory_order_relaxed);
  return *this;
}

double RetrievalPool::checked_norm(std::span<const double> v) const {
  if (v.size() != dimension_) {
    throw InputError("embedding dimension mismatch: expected d=" + std::to_string(dimension_) +
                     ", got d=" + std::to_string(v.size()));
  }
  for (double x : v) {
    if (!std::isfinite(x)) throw InputError("embedding contains a non-finite value");
  }
  const double n = std::sqrt(dot(v.data(), v.data(), v.size()));
  if (!(n > 0.0)) throw InputError("zero embedding vector rejected");
  return n;
}

SimilarityResult RetrievalPool::query_max_cosine(std::span<const double> v) const {
  const double qn = checked_norm(v);
  queries_.fetch_add(1, std::memory_order_relaxed);
  SimilarityResult best;
  const std::size_t n = norms_.size();
  const double* row = data_.data();
  for (std::size_t j = 0; j < n; ++j, row += dimension_) {
    const double c = dot(v.data(), row, dimension_) / (qn * norms_[j]);
    if (!best.argmax_index || c > best.score) {
      best.score = c;
      best.argmax_index = j;
    }
  }
  best.score = std::clamp(best.score, -1.0, 1.0);
  return best;
}

void RetrievalPool::add(std::span<const double> v, std::string source_id) {
  const double n = checked_norm(v);
  data_.insert(data_.end(), v.begin(), v.end());
  norms_.push_back(n);
  ids_.push_back(std::move(source_id));
  ++adds_;
}

void RetrievalPool::replace(std::size_t index, std::span<const double> v, std::string source_id) {
  if (index >= size()) {
    throw InputError("replace index " + std::to_string(index) + " out of range for pool of size " +
                     std::to_string(size()));
  }
  const double n = checked_norm(v);
  std::copy(v.begin(), v.end(), data_.begin() + static_cast<std::ptrdiff_t>(index * dimension_));
  norms_[index] = n;
  ids_[index] = std::move(source_id);
  ++replaces_;
}

std::span<const double> RetrievalPool::vector_at(std::size_t index) const {
  if (index >= size()) throw InputError("pool index " + std::to_string(index) + " out of range");
  return {data_.data() + index * dimension_, dimension_};
}

const std::string& RetrievalPool::source_id_at(std::size_t index) const { return ids_.at(index); }

void RetrievalPool::mark_initial() {
  initial_size_ = size();
  adds_ = 0;
  replaces_ = 0;
  queries_.store(0, std::memory_order_relaxed);
}

PoolStats RetrievalPool::stats() const {
  return {initial_size_, adds_, replaces_, queries_.load(std::memory_order_relaxed)};
}

void RetrievalPool::save(std::ostream& out) const {
  out << nlohmann::json{{"dimension", dimension_}}.dump() << '\n';
  for (std::size_t i = 0; i < size(); ++i) {
    auto v = vector_at(i);
    nlohmann::json rec{{"source_id", ids_[i]},
                       {"vector", std::vector<double>(v.begin(), v.end())}};
    out << rec.dump() << '\n';
  }
}

void RetrievalPool::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  save(out);
  if (!out) throw InputError("write to '" + path + "' failed");
}

RetrievalPool RetrievalPool::load(std::istream& in, const std::string& label,
                                  std::optional<std::size_t> expected_dimension) {
  std::optional<RetrievalPool> pool;
  jsonl::for_each_record(in, label, [&](const jsonl::Json& r, std::size_t) {
    if (!pool) {
      auto it = r.find("dimension");
      if (it == r.end() || !it->is_number_integer() || it->get<long long>() <= 0) {
        throw InputError("first line must be a header {\"dimension\": d} with d > 0");
      }
      const auto d = it->get<std::size_t>();
      if (expected_dimension && *expected_dimension != d) {
        throw InputError("pool dimension mismatch: expected d=" +
                         std::to_string(*expected_dimension) + ", file declares d=" +
                         std::to_string(d));
      }
      pool.emplace(d);
      return;
    }
    auto it = r.find("vector");
    if (it == r.end() || !it->is_array()) throw InputError("entry lacks a 'vector' array");
    pool->add(it->get<std::vector<double>>(), jsonl::require_string(r, "source_id"));
  });
  if (!pool) throw InputError(label + ": empty pool file (missing dimension header)");
  pool->mark_initial();
  return std::move(*pool);
}

RetrievalPool RetrievalPool::load(const std::string& path,
                                  std::optional<std::size_t> expected_dimension) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "' for reading");
  return load(in, path, expected_dimension);
}

}  // namespace sefd

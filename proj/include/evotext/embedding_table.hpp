#ifndef EVOTEXT_EMBEDDING_TABLE_HPP
#define EVOTEXT_EMBEDDING_TABLE_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace evotext {

// Word -> unit-normalized dense vector. Immutable after load; all
// queries are read-only and safe to run concurrently.
class WordEmbeddingTable {
public:
  WordEmbeddingTable() = default;

  // Word-vector text format: `<word> <f_1> ... <f_dim>` per line.
  // Later duplicate words overwrite earlier ones. Vectors are
  // L2-normalized at load; zero vectors and ragged dimensionality are
  // rejected with the offending line number.
  static WordEmbeddingTable load(std::istream& in);
  static WordEmbeddingTable load_file(const std::string& path);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  bool contains(const std::string& word) const { return entries_.count(word) != 0; }
  const std::vector<double>* find(const std::string& word) const;

  const std::unordered_map<std::string, std::vector<double>>& entries() const {
    return entries_;
  }

private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> entries_;
};

// dot(u,v)/(|u||v|). Throws on dimension mismatch or a zero vector.
// Elementwise-identical inputs return exactly 1.0.
double cosine(const std::vector<double>& u, const std::vector<double>& v);

struct Synonym {
  std::string token;
  double similarity; // general-space cosine
};

// Up to k tokens w' != word, present in BOTH tables, with cosine >= delta
// in the general space AND in the counter-fitted space. Sorted by
// general-space similarity descending, ties by lexicographic token order.
// Empty result (not an error) when word is missing from either table.
std::vector<Synonym> nearest_synonyms(const std::string& word,
                                      const WordEmbeddingTable& general,
                                      const WordEmbeddingTable& counterfitted,
                                      double delta, std::size_t k);

} // namespace evotext

#endif

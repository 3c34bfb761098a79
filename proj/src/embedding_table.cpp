#include "evotext/embedding_table.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "evotext/errors.hpp"

namespace evotext {

WordEmbeddingTable WordEmbeddingTable::load(std::istream& in) {
  WordEmbeddingTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream iss(line);
    std::string word;
    if (!(iss >> word))
      throw ParseError("embedding line " + std::to_string(lineno) + ": missing word");
    std::vector<double> vec;
    double x;
    while (iss >> x) vec.push_back(x);
    if (!iss.eof()) {
      throw ParseError("embedding line " + std::to_string(lineno) +
                       ": non-numeric field");
    }
    if (vec.empty())
      throw ParseError("embedding line " + std::to_string(lineno) + ": no values");
    if (table.dim_ == 0) {
      table.dim_ = vec.size();
    } else if (vec.size() != table.dim_) {
      throw DimensionMismatchError(
          "embedding line " + std::to_string(lineno) + ": expected " +
          std::to_string(table.dim_) + " values, got " + std::to_string(vec.size()));
    }
    double norm2 = 0.0;
    for (double v : vec) norm2 += v * v;
    if (norm2 <= 0.0)
      throw ParseError("embedding line " + std::to_string(lineno) + ": zero vector");
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& v : vec) v *= inv;
    table.entries_[word] = std::move(vec);
  }
  return table;
}

WordEmbeddingTable WordEmbeddingTable::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open embedding file: " + path);
  return load(in);
}

const std::vector<double>* WordEmbeddingTable::find(const std::string& word) const {
  auto it = entries_.find(word);
  return it == entries_.end() ? nullptr : &it->second;
}

double cosine(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size())
    throw DimensionMismatchError("cosine: dimension mismatch");
  if (u == v) {
    double norm2 = 0.0;
    for (double x : u) norm2 += x * x;
    if (norm2 == 0.0) throw ZeroVectorError("cosine: zero vector");
    return 1.0;
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw ZeroVectorError("cosine: zero vector");
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

std::vector<Synonym> nearest_synonyms(const std::string& word,
                                      const WordEmbeddingTable& general,
                                      const WordEmbeddingTable& counterfitted,
                                      double delta, std::size_t k) {
  std::vector<Synonym> out;
  const std::vector<double>* wg = general.find(word);
  const std::vector<double>* wc = counterfitted.find(word);
  if (wg == nullptr || wc == nullptr) return out;

  for (const auto& [cand, vec] : general.entries()) {
    if (cand == word) continue;
    const std::vector<double>* cc = counterfitted.find(cand);
    if (cc == nullptr) continue;
    const double sim_g = cosine(*wg, vec);
    if (sim_g < delta) continue;
    if (cosine(*wc, *cc) < delta) continue;
    out.push_back({cand, sim_g});
  }
  std::sort(out.begin(), out.end(), [](const Synonym& a, const Synonym& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.token < b.token;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

} // namespace evotext

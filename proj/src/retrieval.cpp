#include "spnet/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spnet/errors.hpp"
#include "spnet/layers.hpp"

namespace spnet {

Descriptor make_descriptor(std::string object_id, std::span<const double> aggregated_scores,
                           int label) {
  Descriptor d;
  d.object_id = std::move(object_id);
  d.label = label;
  d.probs = softmax(aggregated_scores);
  return d;
}

DistanceMetric metric_from_name(const std::string& name) {
  if (name == "l1" || name == "L1") return DistanceMetric::L1;
  if (name == "l2" || name == "L2") return DistanceMetric::L2;
  throw ConfigError("unknown distance metric '" + name + "'");
}

const char* metric_name(DistanceMetric metric) {
  return metric == DistanceMetric::L1 ? "l1" : "l2";
}

double distance(const Descriptor& a, const Descriptor& b, DistanceMetric metric) {
  if (a.probs.size() != b.probs.size())
    throw ShapeMismatch("distance: descriptor lengths disagree");
  double acc = 0;
  if (metric == DistanceMetric::L1) {
    for (size_t i = 0; i < a.probs.size(); ++i) acc += std::fabs(a.probs[i] - b.probs[i]);
    return acc;
  }
  for (size_t i = 0; i < a.probs.size(); ++i) {
    double d = a.probs[i] - b.probs[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

RankedList rank(int query_index, const std::vector<Descriptor>& corpus, DistanceMetric metric) {
  RankedList out;
  out.query_id = corpus[size_t(query_index)].object_id;
  out.indices.reserve(corpus.size() - 1);
  for (int i = 0; i < int(corpus.size()); ++i)
    if (i != query_index) out.indices.push_back(i);

  std::vector<double> d(corpus.size(), 0.0);
  for (int i : out.indices)
    d[size_t(i)] = distance(corpus[size_t(query_index)], corpus[size_t(i)], metric);

  std::stable_sort(out.indices.begin(), out.indices.end(), [&](int a, int b) {
    if (d[size_t(a)] != d[size_t(b)]) return d[size_t(a)] < d[size_t(b)];
    return a < b;
  });
  out.distances.reserve(out.indices.size());
  for (int i : out.indices) out.distances.push_back(d[size_t(i)]);
  return out;
}

double average_precision(const std::vector<int>& ranked_relevance) {
  int total_relevant = 0;
  for (int r : ranked_relevance) total_relevant += r ? 1 : 0;
  if (total_relevant == 0) return 0.0;
  double sum = 0;
  int hits = 0;
  for (size_t k = 0; k < ranked_relevance.size(); ++k) {
    if (ranked_relevance[k]) {
      ++hits;
      sum += double(hits) / double(k + 1);
    }
  }
  return sum / double(total_relevant);
}

double ndcg(const std::vector<int>& ranked_relevance, int depth) {
  depth = std::min<int>(depth, int(ranked_relevance.size()));
  double dcg = 0;
  for (int i = 0; i < depth; ++i)
    dcg += double(ranked_relevance[size_t(i)]) / std::log2(double(i + 2));

  std::vector<int> ideal = ranked_relevance;
  std::sort(ideal.begin(), ideal.end(), std::greater<int>());
  double idcg = 0;
  for (int i = 0; i < depth; ++i) idcg += double(ideal[size_t(i)]) / std::log2(double(i + 2));
  return idcg > 0 ? dcg / idcg : 0.0;
}

FScores f_scores(const std::vector<double>& per_query_f, const std::vector<int>& query_class,
                 int n_classes) {
  if (per_query_f.size() != query_class.size())
    throw ShapeMismatch("f_scores: per-query lists disagree");
  FScores out;
  if (per_query_f.empty()) return out;

  double sum = 0;
  std::vector<double> class_sum(size_t(n_classes), 0.0);
  std::vector<int> class_count(size_t(n_classes), 0);
  for (size_t i = 0; i < per_query_f.size(); ++i) {
    sum += per_query_f[i];
    class_sum[size_t(query_class[i])] += per_query_f[i];
    class_count[size_t(query_class[i])] += 1;
  }
  out.micro = sum / double(per_query_f.size());

  double macro = 0;
  int seen = 0;
  for (int c = 0; c < n_classes; ++c) {
    if (class_count[size_t(c)] == 0) continue;
    macro += class_sum[size_t(c)] / double(class_count[size_t(c)]);
    ++seen;
  }
  out.macro = seen > 0 ? macro / double(seen) : 0.0;
  return out;
}

RetrievalResult evaluate_retrieval(const std::vector<Descriptor>& corpus, DistanceMetric metric) {
  RetrievalResult result;
  if (corpus.empty()) return result;

  int n_classes = 0;
  for (const auto& d : corpus) n_classes = std::max(n_classes, d.label + 1);

  std::vector<double> per_query_f;
  std::vector<int> per_query_class;
  double ap_sum = 0, ndcg_sum = 0;
  int correct = 0;

  for (int q = 0; q < int(corpus.size()); ++q) {
    RankedList ranked = rank(q, corpus, metric);
    result.rankings.push_back(ranked);

    const Descriptor& query = corpus[size_t(q)];
    std::vector<int> rel(ranked.indices.size(), 0);
    int total_relevant = 0;
    for (size_t k = 0; k < ranked.indices.size(); ++k) {
      rel[k] = corpus[size_t(ranked.indices[k])].label == query.label ? 1 : 0;
      total_relevant += rel[k];
    }

    ap_sum += average_precision(rel);

    // Cutoff = relevant count (the category size seen from this query).
    int cutoff = std::max(1, total_relevant);
    ndcg_sum += ndcg(rel, cutoff);

    int hits = 0;
    for (int k = 0; k < std::min<int>(cutoff, int(rel.size())); ++k) hits += rel[size_t(k)];
    double precision = double(hits) / double(cutoff);
    double recall = total_relevant > 0 ? double(hits) / double(total_relevant) : 0.0;
    double f = precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    per_query_f.push_back(f);
    per_query_class.push_back(std::max(0, query.label));

    int pred = int(std::max_element(query.probs.begin(), query.probs.end()) - query.probs.begin());
    correct += pred == query.label ? 1 : 0;
  }

  FScores f = f_scores(per_query_f, per_query_class, std::max(1, n_classes));
  result.metrics.mean_ap = ap_sum / double(corpus.size());
  result.metrics.mean_ndcg = ndcg_sum / double(corpus.size());
  result.metrics.micro_f = f.micro;
  result.metrics.macro_f = f.macro;
  result.metrics.accuracy = double(correct) / double(corpus.size());
  return result;
}

SimilarityMatrix similarity_matrix(const std::vector<Descriptor>& corpus, DistanceMetric metric) {
  SimilarityMatrix m;
  m.n = int(corpus.size());
  m.order.resize(corpus.size());
  std::iota(m.order.begin(), m.order.end(), 0);
  std::stable_sort(m.order.begin(), m.order.end(), [&](int a, int b) {
    if (corpus[size_t(a)].label != corpus[size_t(b)].label)
      return corpus[size_t(a)].label < corpus[size_t(b)].label;
    return a < b;
  });

  m.values.assign(size_t(m.n) * m.n, 0.0);
  for (int r = 0; r < m.n; ++r)
    for (int c = 0; c < m.n; ++c)
      m.values[size_t(r) * m.n + c] =
          distance(corpus[size_t(m.order[size_t(r)])], corpus[size_t(m.order[size_t(c)])], metric);
  return m;
}

DepthImage similarity_image(const SimilarityMatrix& matrix) {
  DepthImage img(matrix.n, matrix.n, Projection::Grid);
  double mx = 0;
  for (double v : matrix.values) mx = std::max(mx, v);
  double scale = mx > 0 ? 1.0 / mx : 0.0;
  for (size_t i = 0; i < matrix.values.size(); ++i)
    img.pixels[i] = float(matrix.values[i] * scale);
  return img;
}

}  // namespace spnet

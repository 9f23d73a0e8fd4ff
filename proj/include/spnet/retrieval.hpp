#pragma once

#include <span>
#include <string>
#include <vector>

#include "spnet/depth_image.hpp"

namespace spnet {

/// Softmax of the aggregated ensemble scores; a point on the C-simplex.
struct Descriptor {
  std::string object_id;
  int label{-1};  // class index; -1 when unknown
  std::vector<double> probs;
};

Descriptor make_descriptor(std::string object_id, std::span<const double> aggregated_scores,
                           int label = -1);

enum class DistanceMetric { L1, L2 };

DistanceMetric metric_from_name(const std::string& name);
const char* metric_name(DistanceMetric metric);

double distance(const Descriptor& a, const Descriptor& b, DistanceMetric metric);

/// Corpus ranking for one query (the query itself excluded), ascending by
/// distance with ties broken by corpus index.
struct RankedList {
  std::string query_id;
  std::vector<int> indices;       // into the corpus
  std::vector<double> distances;  // non-decreasing
};

RankedList rank(int query_index, const std::vector<Descriptor>& corpus, DistanceMetric metric);

/// AP = (1/R) * sum over relevant positions k of precision@k; 0 when the
/// list has no relevant entries.
double average_precision(const std::vector<int>& ranked_relevance);

/// DCG@depth with gain rel_i and discount 1/log2(i + 1), normalized by the
/// ideal ordering at the same depth; 0 when nothing is relevant.
double ndcg(const std::vector<int>& ranked_relevance, int depth);

struct FScores {
  double micro{0};
  double macro{0};
};

/// micro = mean F over all queries; macro = mean over classes of the
/// per-class mean F.
FScores f_scores(const std::vector<double>& per_query_f, const std::vector<int>& query_class,
                 int n_classes);

struct RetrievalMetrics {
  double mean_ap{0};
  double mean_ndcg{0};
  double micro_f{0};
  double macro_f{0};
  double accuracy{0};  // top-1 on the descriptor argmax
};

/// Full evaluation over a labeled corpus: every object queries the others.
/// F-score and NDCG use a per-query cutoff equal to the number of relevant
/// corpus entries; AP uses the full list.
struct RetrievalResult {
  RetrievalMetrics metrics;
  std::vector<RankedList> rankings;
};

RetrievalResult evaluate_retrieval(const std::vector<Descriptor>& corpus, DistanceMetric metric);

/// Pairwise distances with rows and columns grouped by class label.
struct SimilarityMatrix {
  int n{0};
  std::vector<int> order;       // corpus indices in grouped order
  std::vector<double> values;   // n x n row-major
};

SimilarityMatrix similarity_matrix(const std::vector<Descriptor>& corpus, DistanceMetric metric);

/// Grayscale container for visualization, values scaled to [0, 1] by the
/// matrix maximum.
DepthImage similarity_image(const SimilarityMatrix& matrix);

}  // namespace spnet

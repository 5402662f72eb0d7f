#pragma once

#include <span>
#include <string>
#include <vector>

#include "calm/tensor.hpp"

namespace calm {

/// Query × gallery scores with the gallery index of each query's match.
struct SimilarityMatrix {
  Tensor scores;  // [Q×G]
  std::vector<std::size_t> ground_truth;
};

/// 1-based rank of the true item; ties resolve optimistically
/// (rank = 1 + number of strictly higher scores).
std::vector<std::size_t> rank_of_truth(const SimilarityMatrix& sim);

/// Percentage of ranks ≤ k.
double recall_at_k(std::span<const std::size_t> ranks, std::size_t k);
double mean_rank(std::span<const std::size_t> ranks);

struct RetrievalMetrics {
  double r1 = 0.0;
  double r5 = 0.0;
  double r10 = 0.0;
  double mnr = 0.0;
  std::size_t n_queries = 0;

  /// {"r1":..,"r5":..,"r10":..,"mnr":..,"n_queries":..}
  std::string to_json_text() const;
};

RetrievalMetrics summarize(std::span<const std::size_t> ranks);

/// Text→video cosine scores; query i's match is gallery item i.
SimilarityMatrix text_to_video(const Tensor& text, const Tensor& video);

struct AnchorScore {
  std::size_t index = 0;
  std::string label;
  double prob = 0.0;
};

/// The k most probable anchors of one distribution row, descending, ties
/// by lower index.
std::vector<AnchorScore> top_anchor_report(std::span<const double> probs,
                                           const std::vector<std::string>& labels, std::size_t k);

}  // namespace calm

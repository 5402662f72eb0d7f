#include "calm/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "calm/error.hpp"
#include "calm/kernels.hpp"
#include "calm/ops.hpp"

namespace calm {

std::vector<std::size_t> rank_of_truth(const SimilarityMatrix& sim) {
  const std::size_t q = sim.scores.rows(), g = sim.scores.cols();
  if (sim.ground_truth.size() != q) {
    throw ContractError("rank_of_truth: " + std::to_string(sim.ground_truth.size()) +
                        " ground-truth entries for " + std::to_string(q) + " queries");
  }
  for (std::size_t i = 0; i < q; ++i) {
    if (sim.ground_truth[i] >= g)
      throw ContractError("rank_of_truth: ground truth " + std::to_string(sim.ground_truth[i]) +
                          " out of range for gallery of " + std::to_string(g));
  }
  for (double v : sim.scores.data())
    if (!std::isfinite(v)) throw NumericError("rank_of_truth: non-finite score");
  std::vector<std::size_t> ranks(q);
  kernels::ranks_of_truth(q, g, sim.scores.data(), sim.ground_truth, ranks);
  return ranks;
}

double recall_at_k(std::span<const std::size_t> ranks, std::size_t k) {
  if (ranks.empty()) throw EmptyInputError("recall_at_k: no ranks");
  if (k == 0) throw ContractError("recall_at_k: k must be >= 1");
  const auto hits = std::count_if(ranks.begin(), ranks.end(), [k](std::size_t r) { return r <= k; });
  return 100.0 * static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double mean_rank(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw EmptyInputError("mean_rank: no ranks");
  const double total = std::accumulate(ranks.begin(), ranks.end(), 0.0);
  return total / static_cast<double>(ranks.size());
}

std::string RetrievalMetrics::to_json_text() const {
  nlohmann::ordered_json j;
  j["r1"] = r1;
  j["r5"] = r5;
  j["r10"] = r10;
  j["mnr"] = mnr;
  j["n_queries"] = n_queries;
  return j.dump();
}

RetrievalMetrics summarize(std::span<const std::size_t> ranks) {
  return {recall_at_k(ranks, 1), recall_at_k(ranks, 5), recall_at_k(ranks, 10), mean_rank(ranks),
          ranks.size()};
}

SimilarityMatrix text_to_video(const Tensor& text, const Tensor& video) {
  if (text.rows() != video.rows())
    throw DimensionError("text_to_video: " + std::to_string(text.rows()) + " texts vs " +
                         std::to_string(video.rows()) + " videos");
  Tape tape;
  SimilarityMatrix sim{ops::cosine_rows(tape, text.detach(), video.detach()), {}};
  sim.ground_truth.resize(text.rows());
  std::iota(sim.ground_truth.begin(), sim.ground_truth.end(), std::size_t{0});
  return sim;
}

std::vector<AnchorScore> top_anchor_report(std::span<const double> probs,
                                           const std::vector<std::string>& labels, std::size_t k) {
  if (labels.size() != probs.size())
    throw ContractError("top_anchor_report: " + std::to_string(labels.size()) + " labels for " +
                        std::to_string(probs.size()) + " anchors");
  if (k > probs.size())
    throw ContractError("top_anchor_report: k=" + std::to_string(k) + " exceeds K=" +
                        std::to_string(probs.size()));
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&probs](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  std::vector<AnchorScore> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back({order[i], labels[order[i]], probs[order[i]]});
  return out;
}

}  // namespace calm

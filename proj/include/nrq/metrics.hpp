#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "nrq/codes.hpp"
#include "nrq/dataio.hpp"
#include "nrq/search.hpp"

namespace nrq::metrics {

enum class RelevanceRule { single_label, any_shared_label };

bool is_relevant(std::span<const std::uint32_t> query, std::span<const std::uint32_t> item,
                 RelevanceRule rule);

struct AveragePrecision {
  double value = 0.0;           // 0 when nothing is relevant
  std::size_t relevant = 0;     // relevant items in the ranking
};

/// Full-ranking AP. Ranking ids index into `db_labels`.
AveragePrecision average_precision(const search::RankedList& ranking,
                                   std::span<const std::uint32_t> query_labels,
                                   const LabelSet& db_labels, RelevanceRule rule);

/// Fraction of relevant items among the first m entries; 1 ≤ m ≤ ranking.size().
double precision_at(const search::RankedList& ranking, std::size_t m,
                    std::span<const std::uint32_t> query_labels, const LabelSet& db_labels,
                    RelevanceRule rule);

struct EvalOptions {
  RelevanceRule rule = RelevanceRule::single_label;
  std::vector<std::size_t> precision_at;
  bool macro = false;
  /// Drop the database entry whose index equals the query index.
  bool exclude_same_index = false;
};

struct QueryResult {
  double ap = 0.0;
  std::size_t relevant = 0;
  std::vector<double> precision;  // parallel to EvalOptions::precision_at
};

struct RetrievalReport {
  double map = 0.0;
  std::optional<double> macro_map;
  std::map<std::size_t, double> precision_at;
  /// AP of each query that has at least one relevant item, in query order.
  std::vector<double> per_query_ap;
  std::vector<QueryResult> queries;
  std::size_t queries_without_relevant = 0;
};

RetrievalReport evaluate(const PackedCodes& query_codes, const LabelSet& query_labels,
                         const PackedCodes& db_codes, const LabelSet& db_labels,
                         const EvalOptions& options);

/// Neumaier-compensated sum.
double compensated_sum(std::span<const double> values);

}  // namespace nrq::metrics

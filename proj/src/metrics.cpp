#include "nrq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nrq/error.hpp"

namespace nrq::metrics {

bool is_relevant(std::span<const std::uint32_t> query, std::span<const std::uint32_t> item,
                 RelevanceRule rule) {
  if (rule == RelevanceRule::single_label) {
    return !query.empty() && !item.empty() && query.front() == item.front();
  }
  // Both sets are sorted.
  auto a = query.begin();
  auto b = item.begin();
  while (a != query.end() && b != item.end()) {
    if (*a == *b) return true;
    *a < *b ? ++a : ++b;
  }
  return false;
}

namespace {

const std::vector<std::uint32_t>& labels_of(const LabelSet& db_labels, std::int64_t id) {
  if (id < 0 || static_cast<std::size_t>(id) >= db_labels.size()) {
    throw DataError("ranked id " + std::to_string(id) + " has no label (database has " +
                    std::to_string(db_labels.size()) + " label rows)");
  }
  return db_labels[static_cast<std::size_t>(id)];
}

}  // namespace

AveragePrecision average_precision(const search::RankedList& ranking,
                                   std::span<const std::uint32_t> query_labels,
                                   const LabelSet& db_labels, RelevanceRule rule) {
  AveragePrecision out;
  // Extended-precision compensated accumulation, rounded to double once.
  long double sum = 0.0L;
  long double carry = 0.0L;
  for (std::size_t p = 0; p < ranking.size(); ++p) {
    if (is_relevant(query_labels, labels_of(db_labels, ranking[p].id), rule)) {
      ++out.relevant;
      const long double term = static_cast<long double>(out.relevant) / static_cast<long double>(p + 1);
      const long double t = sum + term;
      carry += std::abs(sum) >= term ? (sum - t) + term : (term - t) + sum;
      sum = t;
    }
  }
  if (out.relevant > 0) {
    out.value = static_cast<double>((sum + carry) / static_cast<long double>(out.relevant));
  }
  return out;
}

double precision_at(const search::RankedList& ranking, std::size_t m,
                    std::span<const std::uint32_t> query_labels, const LabelSet& db_labels,
                    RelevanceRule rule) {
  if (m < 1 || m > ranking.size()) {
    throw DataError("precision@" + std::to_string(m) + " requested for a ranking of " +
                    std::to_string(ranking.size()) + " items");
  }
  std::size_t hits = 0;
  for (std::size_t p = 0; p < m; ++p) {
    if (is_relevant(query_labels, labels_of(db_labels, ranking[p].id), rule)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(m);
}

double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

RetrievalReport evaluate(const PackedCodes& query_codes, const LabelSet& query_labels,
                         const PackedCodes& db_codes, const LabelSet& db_labels,
                         const EvalOptions& options) {
  if (query_codes.size() == 0) throw DataError("query set is empty");
  if (query_codes.size() != query_labels.size()) {
    throw DataError(std::to_string(query_codes.size()) + " query codes but " +
                    std::to_string(query_labels.size()) + " query label rows");
  }
  if (db_codes.size() != db_labels.size()) {
    throw DataError(std::to_string(db_codes.size()) + " database codes but " +
                    std::to_string(db_labels.size()) + " database label rows");
  }
  if (query_codes.bits() != db_codes.bits()) {
    throw DataError("queries have " + std::to_string(query_codes.bits()) + "-bit codes, database has " +
                    std::to_string(db_codes.bits()));
  }
  if (options.macro && options.rule != RelevanceRule::single_label) {
    throw UsageError("macro mAP is defined for single-label relevance only");
  }
  if (options.exclude_same_index && query_codes.size() > db_codes.size()) {
    throw DataError("same-index exclusion needs at least as many database items as queries");
  }
  const std::size_t ranked_size = db_codes.size() - (options.exclude_same_index ? 1 : 0);
  for (std::size_t m : options.precision_at) {
    if (m < 1 || m > ranked_size) {
      throw DataError("precision@" + std::to_string(m) + " exceeds the " + std::to_string(ranked_size) +
                      " ranked database items");
    }
  }

  const search::CodeDatabase db(db_codes);
  RetrievalReport report;
  report.queries.reserve(query_codes.size());
  std::map<std::uint32_t, std::vector<double>> per_class;
  std::vector<std::vector<double>> precision_terms(options.precision_at.size());

  for (std::size_t q = 0; q < query_codes.size(); ++q) {
    search::RankedList ranking = search::rank_all(query_codes.row(q), query_codes.bits(), db);
    if (options.exclude_same_index) {
      std::erase_if(ranking, [q](const search::RankedEntry& e) {
        return e.id == static_cast<std::int64_t>(q);
      });
    }
    const auto& labels = query_labels[q];
    QueryResult result;
    const AveragePrecision ap = average_precision(ranking, labels, db_labels, options.rule);
    result.ap = ap.value;
    result.relevant = ap.relevant;
    for (std::size_t m : options.precision_at) {
      result.precision.push_back(precision_at(ranking, m, labels, db_labels, options.rule));
    }
    if (ap.relevant > 0) {
      report.per_query_ap.push_back(ap.value);
      for (std::size_t i = 0; i < result.precision.size(); ++i) {
        precision_terms[i].push_back(result.precision[i]);
      }
      if (options.macro) per_class[labels.front()].push_back(ap.value);
    } else {
      ++report.queries_without_relevant;
    }
    report.queries.push_back(std::move(result));
  }

  const auto mean = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : compensated_sum(v) / static_cast<double>(v.size());
  };
  report.map = mean(report.per_query_ap);
  for (std::size_t i = 0; i < options.precision_at.size(); ++i) {
    report.precision_at[options.precision_at[i]] = mean(precision_terms[i]);
  }
  if (options.macro) {
    std::vector<double> class_means;
    for (const auto& [cls, aps] : per_class) class_means.push_back(mean(aps));
    report.macro_map = mean(class_means);
  }
  return report;
}

}  // namespace nrq::metrics

#ifndef BREWVEC_RETRIEVAL_HPP
#define BREWVEC_RETRIEVAL_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brewvec/model.hpp"

namespace brewvec {

struct RankedEntry {
    std::string id;
    double score = 0.0;
    friend bool operator==(const RankedEntry&, const RankedEntry&) = default;
};

/**
 * @brief Ranked retrieval output.
 *
 * Scores are non-increasing, ties are ordered by ascending id, and ids are
 * unique.
 */
struct RankedResult {
    std::vector<RankedEntry> entries;
    std::string query;  ///< human-readable echo of the request
};

enum class Similarity { dot, cosine };

enum class Aggregate { mean, max };

struct FlavorWeight {
    std::string tag;
    double weight = 0.0;
};

/// Tolerance on the weight sum of a flavor profile.
inline constexpr double kWeightSumTolerance = 1e-9;

/**
 * Exhaustive ranking of @p candidates (rows of @p vectors, ids in @p ids)
 * against @p query. Rows listed in @p excluded are skipped. Throws
 * DomainError on a dimension mismatch, an empty candidate set or n == 0.
 */
RankedResult rank_by_dot(const std::vector<std::string>& ids, const Matrix& vectors, std::span<const double> query,
                         std::size_t n, std::span<const std::size_t> excluded = {},
                         Similarity similarity = Similarity::dot);

RankedResult similar_beers(const EmbeddingModel& model, const std::string& beer_id, std::size_t n,
                           Similarity similarity = Similarity::dot);

/// Favorites are excluded from the candidates. Mean or max over per-favorite dot products.
RankedResult recommend_from_favorites(const EmbeddingModel& model, const std::vector<std::string>& favorites,
                                      std::size_t n, Aggregate aggregate = Aggregate::mean);

/// Query vector sum(w_i f_i); weights must sum to 1 within kWeightSumTolerance.
RankedResult profile_search(const EmbeddingModel& model, const std::vector<FlavorWeight>& profile, std::size_t n,
                            Similarity similarity = Similarity::dot);

/// Prevalent flavors of a beer, ranked over flavor rows.
RankedResult describe_beer(const EmbeddingModel& model, const std::string& beer_id, std::size_t n = 3,
                           Similarity similarity = Similarity::dot);

/// Query b_base - sum(minus) + sum(plus), excluding the base beer.
RankedResult flavor_arithmetic(const EmbeddingModel& model, const std::string& base_beer,
                               const std::vector<std::string>& minus_tags, const std::vector<std::string>& plus_tags,
                               std::size_t n, Similarity similarity = Similarity::dot);

/// Ordinal of a beer id; throws NotFoundError.
std::size_t require_beer(const EmbeddingModel& model, const std::string& beer_id);
/// Ordinal of a flavor tag; throws NotFoundError.
std::size_t require_flavor(const EmbeddingModel& model, const std::string& tag);

}  // namespace brewvec

#endif  // BREWVEC_RETRIEVAL_HPP

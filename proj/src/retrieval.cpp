#include "brewvec/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "brewvec/errors.hpp"

namespace brewvec {

namespace {

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double similarity_score(std::span<const double> candidate, std::span<const double> query, double query_norm,
                        Similarity similarity) {
    const double raw = dot(candidate, query);
    if (similarity == Similarity::dot) return raw;
    const double denom = norm(candidate) * query_norm;
    return denom > 0.0 ? raw / denom : 0.0;
}

bool ranks_before(const RankedEntry& a, const RankedEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
}

void finalize(std::vector<RankedEntry>& entries, std::size_t n) {
    const std::size_t keep = std::min(n, entries.size());
    std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(keep), entries.end(),
                      ranks_before);
    entries.resize(keep);
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += ", ";
        out += item;
    }
    return out;
}

void require_n(std::size_t n) {
    if (n == 0) throw DomainError("result count n must be at least 1");
}

}  // namespace

std::size_t require_beer(const EmbeddingModel& model, const std::string& beer_id) {
    auto ordinal = model.beers().find(beer_id);
    if (!ordinal) throw NotFoundError("unknown beer '" + beer_id + "'");
    return *ordinal;
}

std::size_t require_flavor(const EmbeddingModel& model, const std::string& tag) {
    auto ordinal = model.flavors().find(tag);
    if (!ordinal) throw NotFoundError("unknown flavor '" + tag + "'");
    return *ordinal;
}

RankedResult rank_by_dot(const std::vector<std::string>& ids, const Matrix& vectors, std::span<const double> query,
                         std::size_t n, std::span<const std::size_t> excluded, Similarity similarity) {
    require_n(n);
    if (ids.size() != vectors.rows()) throw DomainError("candidate ids and vectors differ in count");
    if (ids.empty()) throw DomainError("empty candidate set");
    if (vectors.cols() != query.size()) {
        throw DomainError("query has dimension " + std::to_string(query.size()) + ", candidates have " +
                          std::to_string(vectors.cols()));
    }

    std::vector<bool> skip(ids.size(), false);
    for (std::size_t i : excluded) {
        if (i < skip.size()) skip[i] = true;
    }

    const double query_norm = similarity == Similarity::cosine ? norm(query) : 0.0;
    RankedResult result;
    result.entries.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (skip[i]) continue;
        result.entries.push_back({ids[i], similarity_score(vectors.row(i), query, query_norm, similarity)});
    }
    finalize(result.entries, n);
    return result;
}

RankedResult similar_beers(const EmbeddingModel& model, const std::string& beer_id, std::size_t n,
                           Similarity similarity) {
    const std::size_t beer = require_beer(model, beer_id);
    const std::size_t excluded[] = {beer};
    RankedResult result = rank_by_dot(model.beers().items(), model.beer_matrix(), model.beer_vector(beer), n,
                                      excluded, similarity);
    result.query = "similar to " + beer_id;
    return result;
}

RankedResult recommend_from_favorites(const EmbeddingModel& model, const std::vector<std::string>& favorites,
                                      std::size_t n, Aggregate aggregate) {
    require_n(n);
    if (favorites.empty()) throw DomainError("favorites list is empty");
    std::vector<std::size_t> favorite_rows;
    favorite_rows.reserve(favorites.size());
    for (const auto& id : favorites) favorite_rows.push_back(require_beer(model, id));

    std::vector<bool> is_favorite(model.beers().size(), false);
    for (std::size_t f : favorite_rows) is_favorite[f] = true;

    const auto& beers = model.beer_matrix();
    RankedResult result;
    for (std::size_t c = 0; c < beers.rows(); ++c) {
        if (is_favorite[c]) continue;
        double total = 0.0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t f : favorite_rows) {
            const double s = dot(beers.row(c), beers.row(f));
            total += s;
            best = std::max(best, s);
        }
        const double aggregated = aggregate == Aggregate::mean ? total / static_cast<double>(favorite_rows.size()) : best;
        result.entries.push_back({model.beers().at(c), aggregated});
    }
    finalize(result.entries, n);
    result.query = std::string(aggregate == Aggregate::mean ? "mean" : "max") + " over favorites " + join(favorites);
    return result;
}

RankedResult profile_search(const EmbeddingModel& model, const std::vector<FlavorWeight>& profile, std::size_t n,
                            Similarity similarity) {
    if (profile.empty()) throw DomainError("flavor profile is empty");
    double sum = 0.0;
    for (const auto& entry : profile) {
        if (!std::isfinite(entry.weight)) throw ValidationError("flavor weight for '" + entry.tag + "' is not finite");
        sum += entry.weight;
    }
    if (std::abs(sum - 1.0) > kWeightSumTolerance) {
        std::ostringstream msg;
        msg << "flavor weights must sum to 1, got sum " << sum;
        throw ValidationError(msg.str());
    }

    std::vector<double> query(model.dim(), 0.0);
    std::ostringstream echo;
    echo << "profile";
    for (const auto& entry : profile) {
        const auto f = model.flavor_vector(require_flavor(model, entry.tag));
        for (std::size_t d = 0; d < query.size(); ++d) query[d] += entry.weight * f[d];
        echo << ' ' << entry.tag << '=' << entry.weight;
    }
    RankedResult result = rank_by_dot(model.beers().items(), model.beer_matrix(), query, n, {}, similarity);
    result.query = echo.str();
    return result;
}

RankedResult describe_beer(const EmbeddingModel& model, const std::string& beer_id, std::size_t n,
                           Similarity similarity) {
    const std::size_t beer = require_beer(model, beer_id);
    RankedResult result =
        rank_by_dot(model.flavors().items(), model.flavor_matrix(), model.beer_vector(beer), n, {}, similarity);
    result.query = "flavors of " + beer_id;
    return result;
}

RankedResult flavor_arithmetic(const EmbeddingModel& model, const std::string& base_beer,
                               const std::vector<std::string>& minus_tags, const std::vector<std::string>& plus_tags,
                               std::size_t n, Similarity similarity) {
    const std::size_t base = require_beer(model, base_beer);
    const auto base_vector = model.beer_vector(base);
    std::vector<double> query(base_vector.begin(), base_vector.end());
    for (const auto& tag : minus_tags) {
        const auto f = model.flavor_vector(require_flavor(model, tag));
        for (std::size_t d = 0; d < query.size(); ++d) query[d] -= f[d];
    }
    for (const auto& tag : plus_tags) {
        const auto f = model.flavor_vector(require_flavor(model, tag));
        for (std::size_t d = 0; d < query.size(); ++d) query[d] += f[d];
    }
    const std::size_t excluded[] = {base};
    RankedResult result =
        rank_by_dot(model.beers().items(), model.beer_matrix(), query, n, excluded, similarity);
    result.query = base_beer;
    for (const auto& tag : minus_tags) result.query += " - " + tag;
    for (const auto& tag : plus_tags) result.query += " + " + tag;
    return result;
}

}  // namespace brewvec

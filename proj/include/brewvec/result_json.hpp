#ifndef BREWVEC_RESULT_JSON_HPP
#define BREWVEC_RESULT_JSON_HPP

#include <string>
#include <vector>

#include "json.hpp"

#include "brewvec/ingest.hpp"
#include "brewvec/model.hpp"
#include "brewvec/retrieval.hpp"

namespace brewvec {

/**
 * @brief Renders RankedResults in the wire schema
 * {query, results:[{id, score, mean_rating|null, top_flavors:[...]}]}.
 *
 * Beer rows carry the beer's mean rating and its three prevalent flavors;
 * flavor rows carry null and an empty list. Top flavors are computed once at
 * construction.
 */
class ResultFormatter {
public:
    ResultFormatter(const EmbeddingModel& model, const BeerStats& stats);

    nlohmann::json beers(const RankedResult& result, nlohmann::json query) const;
    nlohmann::json flavors(const RankedResult& result, nlohmann::json query) const;

    /// [{id, checkins, mean_rating|null}] over the whole vocabulary.
    nlohmann::json beer_list() const;

    const std::vector<std::string>& top_flavors(std::size_t beer) const { return top_flavors_.at(beer); }

private:
    const EmbeddingModel* model_;
    const BeerStats* stats_;
    std::vector<std::vector<std::string>> top_flavors_;
};

}  // namespace brewvec

#endif  // BREWVEC_RESULT_JSON_HPP

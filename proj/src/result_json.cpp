#include "brewvec/result_json.hpp"

#include <algorithm>

#include "brewvec/errors.hpp"

namespace brewvec {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& value) { return value ? json(*value) : json(nullptr); }

}  // namespace

ResultFormatter::ResultFormatter(const EmbeddingModel& model, const BeerStats& stats) : model_(&model), stats_(&stats) {
    if (stats.mean_rating.size() != model.beers().size() || stats.checkin_count.size() != model.beers().size()) {
        throw DomainError("beer statistics are not aligned with the beer vocabulary");
    }
    const std::size_t n = std::min<std::size_t>(3, model.flavors().size());
    top_flavors_.reserve(model.beers().size());
    for (const auto& id : model.beers().items()) {
        std::vector<std::string> tags;
        for (auto& entry : describe_beer(model, id, n).entries) tags.push_back(std::move(entry.id));
        top_flavors_.push_back(std::move(tags));
    }
}

json ResultFormatter::beers(const RankedResult& result, json query) const {
    json rows = json::array();
    for (const auto& entry : result.entries) {
        const std::size_t beer = require_beer(*model_, entry.id);
        rows.push_back({{"id", entry.id},
                        {"score", entry.score},
                        {"mean_rating", optional_number(stats_->mean_rating[beer])},
                        {"top_flavors", top_flavors_[beer]}});
    }
    return {{"query", std::move(query)}, {"results", std::move(rows)}};
}

json ResultFormatter::flavors(const RankedResult& result, json query) const {
    json rows = json::array();
    for (const auto& entry : result.entries) {
        rows.push_back({{"id", entry.id}, {"score", entry.score}, {"mean_rating", nullptr}, {"top_flavors", json::array()}});
    }
    return {{"query", std::move(query)}, {"results", std::move(rows)}};
}

json ResultFormatter::beer_list() const {
    json rows = json::array();
    for (std::size_t b = 0; b < model_->beers().size(); ++b) {
        rows.push_back({{"id", model_->beers().at(b)},
                        {"checkins", stats_->checkin_count[b]},
                        {"mean_rating", optional_number(stats_->mean_rating[b])}});
    }
    return rows;
}

}  // namespace brewvec

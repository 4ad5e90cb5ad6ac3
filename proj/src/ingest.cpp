#include "brewvec/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "brewvec/errors.hpp"
#include "brewvec/random.hpp"

namespace brewvec {

using nlohmann::json;

namespace {

CheckIn checkin_from_json(const json& record, std::size_t line) {
    if (!record.is_object()) throw ParseError(line, "record is not a JSON object");

    CheckIn checkin;
    auto beer = record.find("beer_id");
    if (beer == record.end() || !beer->is_string()) throw ParseError(line, "missing string field 'beer_id'");
    checkin.beer_id = beer->get<std::string>();
    if (checkin.beer_id.empty()) throw ParseError(line, "empty 'beer_id'");

    auto flavors = record.find("flavors");
    if (flavors == record.end() || !flavors->is_array()) throw ParseError(line, "missing array field 'flavors'");
    for (const auto& tag : *flavors) {
        if (!tag.is_string()) throw ParseError(line, "non-string entry in 'flavors'");
        checkin.flavors.push_back(tag.get<std::string>());
    }

    if (auto rating = record.find("rating"); rating != record.end() && !rating->is_null()) {
        if (!rating->is_number()) throw ParseError(line, "'rating' is not a number");
        const double value = rating->get<double>();
        if (!(value >= 0.0 && value <= 5.0)) {
            throw ValidationError("line " + std::to_string(line) + ": rating " + rating->dump() +
                                  " outside [0, 5]");
        }
        checkin.rating = value;
    }
    for (auto [key, slot] : {std::pair{"style", &checkin.style}, std::pair{"brewery", &checkin.brewery}}) {
        auto field = record.find(key);
        if (field == record.end() || field->is_null()) continue;
        if (!field->is_string()) throw ParseError(line, std::string("'") + key + "' is not a string");
        *slot = field->get<std::string>();
    }
    return checkin;
}

}  // namespace

ParseResult parse_checkins(std::istream& in) {
    ParseResult result;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) continue;

        json record;
        try {
            record = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ParseError(line, std::string("malformed JSON: ") + e.what());
        }
        CheckIn checkin = checkin_from_json(record, line);
        if (checkin.flavors.empty()) {
            ++result.dropped_empty;
            continue;
        }
        result.checkins.push_back(std::move(checkin));
    }
    return result;
}

void write_checkins(std::ostream& out, const std::vector<CheckIn>& checkins) {
    for (const auto& checkin : checkins) {
        json record = json::object();
        record["beer_id"] = checkin.beer_id;
        record["flavors"] = checkin.flavors;
        if (checkin.rating) record["rating"] = *checkin.rating;
        if (checkin.style) record["style"] = *checkin.style;
        if (checkin.brewery) record["brewery"] = *checkin.brewery;
        out << record.dump() << '\n';
    }
}

Dataset build_dataset(const std::vector<CheckIn>& checkins, const DatasetOptions& options,
                      DatasetWarnings* warnings) {
    if (checkins.empty()) throw DomainError("no check-ins to build a dataset from");
    if (options.min_checkins == 0) throw DomainError("min_checkins must be at least 1");

    DatasetWarnings local;

    std::optional<std::unordered_set<std::string>> allowed;
    if (options.allowed_flavors) allowed.emplace(options.allowed_flavors->begin(), options.allowed_flavors->end());

    std::vector<CheckIn> kept;
    kept.reserve(checkins.size());
    for (const auto& checkin : checkins) {
        if (checkin.flavors.empty()) throw DomainError("check-in of '" + checkin.beer_id + "' has no flavors");
        CheckIn copy = checkin;
        if (allowed) {
            std::erase_if(copy.flavors, [&](const std::string& tag) {
                const bool unknown = !allowed->contains(tag);
                local.unknown_tags += unknown;
                return unknown;
            });
            if (copy.flavors.empty()) {
                ++local.emptied_checkins;
                continue;
            }
        }
        kept.push_back(std::move(copy));
    }

    std::unordered_map<std::string, std::size_t> per_beer;
    for (const auto& checkin : kept) ++per_beer[checkin.beer_id];
    for (const auto& [id, count] : per_beer) local.filtered_beers += count < options.min_checkins;
    std::erase_if(kept, [&](const CheckIn& c) { return per_beer[c.beer_id] < options.min_checkins; });
    if (kept.empty()) throw DomainError("every beer was filtered out (min_checkins=" +
                                        std::to_string(options.min_checkins) + ")");

    Dataset dataset;
    std::vector<double> rating_sum;
    std::vector<std::int64_t> rating_count;
    for (const auto& checkin : kept) {
        const std::size_t beer = dataset.beers.add(checkin.beer_id);
        if (beer == dataset.stats.checkin_count.size()) {
            dataset.stats.checkin_count.push_back(0);
            rating_sum.push_back(0.0);
            rating_count.push_back(0);
        }
        ++dataset.stats.checkin_count[beer];
        if (checkin.rating) {
            rating_sum[beer] += *checkin.rating;
            ++rating_count[beer];
        }
        for (const auto& tag : checkin.flavors) dataset.pairs.push_back({beer, dataset.flavors.add(tag)});
    }
    dataset.stats.mean_rating.resize(dataset.beers.size());
    for (std::size_t b = 0; b < dataset.beers.size(); ++b) {
        if (rating_count[b] > 0) dataset.stats.mean_rating[b] = rating_sum[b] / static_cast<double>(rating_count[b]);
    }
    dataset.checkins = std::move(kept);
    if (warnings) *warnings = local;
    return dataset;
}

Matrix CountMatrix::to_matrix() const {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < counts.size(); ++i) m.data()[i] = static_cast<double>(counts[i]);
    return m;
}

CountMatrix build_count_matrix(const Dataset& dataset) {
    CountMatrix out;
    out.rows = dataset.beers.size();
    out.cols = dataset.flavors.size();
    out.beers = dataset.beers;
    out.flavors = dataset.flavors;
    out.counts.assign(out.rows * out.cols, 0);

    std::vector<std::size_t> seen;
    for (const auto& checkin : dataset.checkins) {
        const std::size_t beer = *dataset.beers.find(checkin.beer_id);
        seen.clear();
        for (const auto& tag : checkin.flavors) seen.push_back(*dataset.flavors.find(tag));
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        for (std::size_t flavor : seen) ++out.counts[beer * out.cols + flavor];
    }
    return out;
}

std::string synthetic_beer_id(std::size_t cluster, std::size_t beer) {
    return "cluster" + std::to_string(cluster) + "/beer" + std::to_string(beer);
}

std::string synthetic_flavor_tag(std::size_t cluster, std::size_t flavor) {
    return "c" + std::to_string(cluster) + "_flavor" + std::to_string(flavor);
}

void validate(const SyntheticSpec& spec) {
    if (spec.n_clusters == 0 || spec.beers_per_cluster == 0 || spec.flavors_per_cluster == 0 ||
        spec.checkins_per_beer == 0 || spec.tags_per_checkin == 0) {
        throw DomainError("synthetic spec counts must all be positive");
    }
    if (!(spec.noise_rate >= 0.0 && spec.noise_rate < 1.0)) throw DomainError("noise_rate must lie in [0, 1)");
    if (spec.tags_per_checkin > spec.flavors_per_cluster) {
        throw DomainError("tags_per_checkin (" + std::to_string(spec.tags_per_checkin) +
                          ") exceeds flavors_per_cluster (" + std::to_string(spec.flavors_per_cluster) + ")");
    }
}

std::vector<CheckIn> generate_synthetic_checkins(const SyntheticSpec& spec, SyntheticTruth* truth) {
    validate(spec);
    Rng rng(spec.seed);
    const std::size_t n_flavors = spec.n_clusters * spec.flavors_per_cluster;
    const std::size_t outside = n_flavors - spec.flavors_per_cluster;

    std::vector<CheckIn> checkins;
    checkins.reserve(spec.n_clusters * spec.beers_per_cluster * spec.checkins_per_beer);
    std::vector<std::size_t> pool(spec.flavors_per_cluster);

    for (std::size_t c = 0; c < spec.n_clusters; ++c) {
        for (std::size_t j = 0; j < spec.beers_per_cluster; ++j) {
            const std::string id = synthetic_beer_id(c, j);
            if (truth) {
                truth->cluster[id] = c;
                auto& tags = truth->pool[id];
                for (std::size_t f = 0; f < spec.flavors_per_cluster; ++f) tags.insert(synthetic_flavor_tag(c, f));
            }
            for (std::size_t n = 0; n < spec.checkins_per_beer; ++n) {
                CheckIn checkin;
                checkin.beer_id = id;
                std::iota(pool.begin(), pool.end(), std::size_t{0});
                for (std::size_t t = 0; t < spec.tags_per_checkin; ++t) {
                    const std::size_t pick = t + rng.below(pool.size() - t);
                    std::swap(pool[t], pool[pick]);
                    std::string tag = synthetic_flavor_tag(c, pool[t]);
                    if (outside > 0 && rng.unit() < spec.noise_rate) {
                        // Global flavor index skipping this cluster's block.
                        std::size_t g = rng.below(outside);
                        if (g >= c * spec.flavors_per_cluster) g += spec.flavors_per_cluster;
                        tag = synthetic_flavor_tag(g / spec.flavors_per_cluster, g % spec.flavors_per_cluster);
                    }
                    checkin.flavors.push_back(std::move(tag));
                }
                checkins.push_back(std::move(checkin));
            }
        }
    }
    return checkins;
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
    SyntheticCorpus corpus;
    corpus.dataset = build_dataset(generate_synthetic_checkins(spec, &corpus.truth));
    return corpus;
}

}  // namespace brewvec

#ifndef BREWVEC_INGEST_HPP
#define BREWVEC_INGEST_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "brewvec/model.hpp"

namespace brewvec {

/// One user's tasting of a beer.
struct CheckIn {
    std::string beer_id;
    std::vector<std::string> flavors;
    std::optional<double> rating;  ///< within [0, 5] when present
    std::optional<std::string> style;
    std::optional<std::string> brewery;

    friend bool operator==(const CheckIn&, const CheckIn&) = default;
};

struct ParseResult {
    std::vector<CheckIn> checkins;
    std::size_t dropped_empty = 0;  ///< records with an empty flavor list
};

/**
 * @brief Reads one JSON object per line.
 *
 * Blank lines are skipped. Throws ParseError (with the line number) on
 * malformed records and ValidationError when a rating falls outside [0, 5].
 */
ParseResult parse_checkins(std::istream& in);

/// Inverse of parse_checkins: one compact JSON object per line.
void write_checkins(std::ostream& out, const std::vector<CheckIn>& checkins);

/// Per-beer aggregates aligned with the beer vocabulary.
struct BeerStats {
    std::vector<std::optional<double>> mean_rating;
    std::vector<std::int64_t> checkin_count;

    friend bool operator==(const BeerStats&, const BeerStats&) = default;
};

struct Dataset {
    BeerVocab beers;
    FlavorVocab flavors;
    std::vector<CheckIn> checkins;
    std::vector<Pair> pairs;
    BeerStats stats;
};

struct DatasetOptions {
    std::size_t min_checkins = 1;
    /// When set, tags outside this list are dropped.
    std::optional<std::vector<std::string>> allowed_flavors;
};

struct DatasetWarnings {
    std::size_t unknown_tags = 0;       ///< tags dropped by the fixed vocabulary
    std::size_t emptied_checkins = 0;   ///< check-ins left with no tags after that
    std::size_t filtered_beers = 0;     ///< beers under min_checkins
};

/**
 * @brief Builds vocabularies, training pairs and per-beer aggregates.
 *
 * Vocabularies follow first appearance among retained check-ins. Duplicate
 * tags inside one check-in each yield a training pair.
 */
Dataset build_dataset(const std::vector<CheckIn>& checkins, const DatasetOptions& options = {},
                      DatasetWarnings* warnings = nullptr);

/// |B| x |F| counts of check-ins whose flavor list contains each tag.
struct CountMatrix {
    std::vector<std::int64_t> counts;  ///< row-major
    std::size_t rows = 0;
    std::size_t cols = 0;
    BeerVocab beers;
    FlavorVocab flavors;

    std::int64_t at(std::size_t beer, std::size_t flavor) const { return counts[beer * cols + flavor]; }
    Matrix to_matrix() const;
};

CountMatrix build_count_matrix(const Dataset& dataset);

struct SyntheticSpec {
    std::size_t n_clusters = 3;
    std::size_t beers_per_cluster = 10;
    std::size_t flavors_per_cluster = 5;
    std::size_t checkins_per_beer = 50;
    std::size_t tags_per_checkin = 3;
    double noise_rate = 0.1;
    std::uint64_t seed = 7;
};

/// Ground truth of a synthetic corpus, keyed by beer id.
struct SyntheticTruth {
    std::map<std::string, std::size_t> cluster;
    std::map<std::string, std::set<std::string>> pool;
};

struct SyntheticCorpus {
    Dataset dataset;
    SyntheticTruth truth;
};

/// Throws DomainError when the spec is invalid.
void validate(const SyntheticSpec& spec);

/// Raw check-ins of a synthetic corpus in generation order.
std::vector<CheckIn> generate_synthetic_checkins(const SyntheticSpec& spec, SyntheticTruth* truth = nullptr);

/**
 * @brief Clustered corpus with known flavor pools.
 *
 * Each check-in samples tags_per_checkin distinct tags from its cluster's
 * pool; each tag is then swapped for a uniformly drawn out-of-cluster tag
 * with probability noise_rate.
 */
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

std::string synthetic_beer_id(std::size_t cluster, std::size_t beer);
std::string synthetic_flavor_tag(std::size_t cluster, std::size_t flavor);

}  // namespace brewvec

#endif  // BREWVEC_INGEST_HPP

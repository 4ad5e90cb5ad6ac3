#ifndef BREWVEC_MODEL_STORE_HPP
#define BREWVEC_MODEL_STORE_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include "brewvec/ingest.hpp"
#include "brewvec/model.hpp"

namespace brewvec {

/*
 * Model file layout (all integers little-endian):
 *
 *   "B2V1"                      4 bytes
 *   header length L             uint32
 *   header                      L bytes of UTF-8 JSON:
 *       {version:1, k, beer_count, flavor_count, beer_ids:[...],
 *        flavor_tags:[...], mean_ratings:{id:number}, checkin_counts:{id:int}}
 *   payload                     float32 beer matrix then float32 flavor
 *                               matrix, row-major, 4*k*(beer_count+flavor_count) bytes
 */
inline constexpr char kModelMagic[4] = {'B', '2', 'V', '1'};
inline constexpr int kModelFormatVersion = 1;

struct ModelBundle {
    EmbeddingModel model;
    BeerStats stats;  ///< aligned with model.beers()
};

/// Serialized form. Deterministic: equal inputs give equal bytes.
std::string encode_model(const EmbeddingModel& model, const BeerStats& stats);

/// Throws FormatError on layout violations and ValidationError on bad values.
ModelBundle decode_model(const std::string& bytes);

/// Writes to a sibling temporary file then renames it over @p path.
void save_model(const EmbeddingModel& model, const BeerStats& stats, const std::filesystem::path& path);

ModelBundle load_model(const std::filesystem::path& path);

}  // namespace brewvec

#endif  // BREWVEC_MODEL_STORE_HPP

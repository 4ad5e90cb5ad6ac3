#include "brewvec/model_store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <system_error>

#include "json.hpp"

#include "brewvec/errors.hpp"

namespace brewvec {

using nlohmann::json;

namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

void put_u32(std::string& out, std::uint32_t value) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const std::string& in, std::size_t offset) {
    std::uint32_t value = 0;
    for (int i = 0; i < 4; ++i) value |= std::uint32_t(static_cast<unsigned char>(in[offset + i])) << (8 * i);
    return value;
}

void put_matrix(std::string& out, const Matrix& m, const char* name) {
    for (double v : m.data()) {
        const float f = static_cast<float>(v);
        if (!std::isfinite(f)) throw ValidationError(std::string(name) + " matrix entry does not fit in float32");
        put_u32(out, std::bit_cast<std::uint32_t>(f));
    }
}

Matrix get_matrix(const std::string& in, std::size_t& offset, std::size_t rows, std::size_t cols, const char* name) {
    Matrix m(rows, cols);
    for (double& v : m.data()) {
        const float f = std::bit_cast<float>(get_u32(in, offset));
        offset += 4;
        if (!std::isfinite(f)) throw ValidationError(std::string("non-finite entry in ") + name + " matrix");
        v = static_cast<double>(f);
    }
    return m;
}

template <typename T>
T header_field(const json& header, const char* key) {
    auto it = header.find(key);
    if (it == header.end()) throw FormatError(std::string("model header lacks '") + key + "'");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw FormatError(std::string("model header field '") + key + "' has the wrong type");
    }
}

}  // namespace

std::string encode_model(const EmbeddingModel& model, const BeerStats& stats) {
    model.validate();
    const std::size_t beer_count = model.beers().size();
    if (stats.checkin_count.size() != beer_count || stats.mean_rating.size() != beer_count) {
        throw DomainError("beer statistics are not aligned with the beer vocabulary");
    }

    json mean_ratings = json::object();
    json checkin_counts = json::object();
    for (std::size_t b = 0; b < beer_count; ++b) {
        const auto& id = model.beers().at(b);
        if (stats.mean_rating[b]) mean_ratings[id] = *stats.mean_rating[b];
        checkin_counts[id] = stats.checkin_count[b];
    }
    const json header = {
        {"version", kModelFormatVersion},
        {"k", model.dim()},
        {"beer_count", beer_count},
        {"flavor_count", model.flavors().size()},
        {"beer_ids", model.beers().items()},
        {"flavor_tags", model.flavors().items()},
        {"mean_ratings", std::move(mean_ratings)},
        {"checkin_counts", std::move(checkin_counts)},
    };
    const std::string text = header.dump();
    if (text.size() > UINT32_MAX) throw DomainError("model header exceeds 4 GiB");

    std::string out(kModelMagic, sizeof kModelMagic);
    put_u32(out, static_cast<std::uint32_t>(text.size()));
    out += text;
    out.reserve(out.size() + 4 * model.dim() * (beer_count + model.flavors().size()));
    put_matrix(out, model.beer_matrix(), "beer");
    put_matrix(out, model.flavor_matrix(), "flavor");
    return out;
}

ModelBundle decode_model(const std::string& bytes) {
    if (bytes.size() < 8) throw FormatError("file too short for a model header (" + std::to_string(bytes.size()) + " bytes)");
    if (std::memcmp(bytes.data(), kModelMagic, sizeof kModelMagic) != 0) throw FormatError("bad magic");
    const std::size_t header_len = get_u32(bytes, 4);
    if (bytes.size() < 8 + header_len) {
        throw FormatError("truncated header: expected " + std::to_string(header_len) + " bytes, got " +
                          std::to_string(bytes.size() - 8));
    }

    json header;
    try {
        header = json::parse(bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(header_len));
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("model header is not valid JSON: ") + e.what());
    }
    if (!header.is_object()) throw FormatError("model header is not a JSON object");

    const int version = header_field<int>(header, "version");
    if (version != kModelFormatVersion) throw FormatError("unsupported model version " + std::to_string(version));
    const auto k = header_field<std::size_t>(header, "k");
    const auto beer_count = header_field<std::size_t>(header, "beer_count");
    const auto flavor_count = header_field<std::size_t>(header, "flavor_count");
    auto beer_ids = header_field<std::vector<std::string>>(header, "beer_ids");
    auto flavor_tags = header_field<std::vector<std::string>>(header, "flavor_tags");
    const auto mean_ratings = header_field<std::map<std::string, double>>(header, "mean_ratings");
    const auto checkin_counts = header_field<std::map<std::string, std::int64_t>>(header, "checkin_counts");

    if (k == 0) throw FormatError("model dimension k is zero");
    if (beer_ids.size() != beer_count) {
        throw FormatError("beer_count " + std::to_string(beer_count) + " but " + std::to_string(beer_ids.size()) +
                          " beer ids");
    }
    if (flavor_tags.size() != flavor_count) {
        throw FormatError("flavor_count " + std::to_string(flavor_count) + " but " +
                          std::to_string(flavor_tags.size()) + " flavor tags");
    }

    const std::size_t expected = 4 * k * (beer_count + flavor_count);
    const std::size_t actual = bytes.size() - 8 - header_len;
    if (actual != expected) {
        throw FormatError(std::string(actual < expected ? "truncated" : "oversized") + " payload: expected " +
                          std::to_string(expected) + " bytes, got " + std::to_string(actual));
    }

    std::size_t offset = 8 + header_len;
    Matrix beer_matrix = get_matrix(bytes, offset, beer_count, k, "beer");
    Matrix flavor_matrix = get_matrix(bytes, offset, flavor_count, k, "flavor");

    BeerVocab beers;
    FlavorVocab flavors;
    try {
        beers = BeerVocab(std::move(beer_ids));
        flavors = FlavorVocab(std::move(flavor_tags));
    } catch (const DomainError& e) {
        throw FormatError(e.what());
    }

    BeerStats stats;
    stats.mean_rating.resize(beer_count);
    stats.checkin_count.assign(beer_count, 0);
    for (const auto& [id, rating] : mean_ratings) {
        auto b = beers.find(id);
        if (!b) throw FormatError("mean rating for unknown beer '" + id + "'");
        if (!(rating >= 0.0 && rating <= 5.0)) throw ValidationError("mean rating of '" + id + "' outside [0, 5]");
        stats.mean_rating[*b] = rating;
    }
    for (const auto& [id, count] : checkin_counts) {
        auto b = beers.find(id);
        if (!b) throw FormatError("check-in count for unknown beer '" + id + "'");
        if (count < 0) throw ValidationError("negative check-in count for '" + id + "'");
        stats.checkin_count[*b] = count;
    }

    try {
        return {EmbeddingModel(std::move(beers), std::move(flavors), std::move(beer_matrix), std::move(flavor_matrix)),
                std::move(stats)};
    } catch (const DomainError& e) {
        throw ValidationError(e.what());
    }
}

void save_model(const EmbeddingModel& model, const BeerStats& stats, const std::filesystem::path& path) {
    const std::string bytes = encode_model(model, stats);
    std::filesystem::path temp = path;
    temp += ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + temp.string() + "' for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw IoError("failed writing '" + temp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(temp, path, ec);
    if (ec) {
        std::filesystem::remove(temp, ec);
        throw IoError("cannot move model into place at '" + path.string() + "'");
    }
}

ModelBundle load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file '" + path.string() + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
    return decode_model(bytes);
}

}  // namespace brewvec

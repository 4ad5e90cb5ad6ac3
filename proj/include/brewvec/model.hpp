#ifndef BREWVEC_MODEL_HPP
#define BREWVEC_MODEL_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "brewvec/matrix.hpp"

namespace brewvec {

/**
 * @brief Ordered set of unique strings with a dense ordinal index.
 *
 * Ordinals are assigned in insertion order and are always dense in [0, size()).
 */
class Vocab {
public:
    Vocab() = default;
    /// Throws DomainError on a duplicate entry.
    explicit Vocab(std::vector<std::string> items);

    /// Returns the ordinal of @p item, inserting it if absent.
    std::size_t add(const std::string& item);

    std::optional<std::size_t> find(std::string_view item) const;
    bool contains(std::string_view item) const { return find(item).has_value(); }

    /// Throws IndexError when out of range.
    const std::string& at(std::size_t ordinal) const;
    const std::vector<std::string>& items() const noexcept { return items_; }
    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }

    friend bool operator==(const Vocab& a, const Vocab& b) { return a.items_ == b.items_; }

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept {
            return std::hash<std::string_view>{}(s);
        }
    };
    std::vector<std::string> items_;
    std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> index_;
};

/// Beer ids of the form "brewery/name".
using BeerVocab = Vocab;
/// Standardized flavor tags.
using FlavorVocab = Vocab;

/// (beer ordinal, flavor ordinal) skip-gram training pair.
struct Pair {
    std::size_t beer = 0;
    std::size_t flavor = 0;
    friend bool operator==(const Pair&, const Pair&) = default;
};

/**
 * @brief Learned beer and flavor embeddings.
 *
 * beer_matrix is |B| x k, flavor_matrix is |F| x k. The constructor enforces
 * matching row counts, a shared positive k and finite entries.
 */
class EmbeddingModel {
public:
    EmbeddingModel(BeerVocab beers, FlavorVocab flavors, Matrix beer_matrix, Matrix flavor_matrix);

    const BeerVocab& beers() const noexcept { return beers_; }
    const FlavorVocab& flavors() const noexcept { return flavors_; }
    const Matrix& beer_matrix() const noexcept { return beer_matrix_; }
    const Matrix& flavor_matrix() const noexcept { return flavor_matrix_; }
    std::size_t dim() const noexcept { return beer_matrix_.cols(); }

    std::span<const double> beer_vector(std::size_t beer) const;
    std::span<const double> flavor_vector(std::size_t flavor) const;

    /// Mutable parameter access for the optimizer. Finiteness is not rechecked.
    Matrix& mutable_beer_matrix() noexcept { return beer_matrix_; }
    Matrix& mutable_flavor_matrix() noexcept { return flavor_matrix_; }

    /// Re-checks every invariant; throws DomainError on violation.
    void validate() const;

private:
    BeerVocab beers_;
    FlavorVocab flavors_;
    Matrix beer_matrix_;
    Matrix flavor_matrix_;
};

/// Dot product of a beer row and a flavor row.
double score(const EmbeddingModel& model, std::size_t beer, std::size_t flavor);

/// Numerically stable softmax (max subtraction).
std::vector<double> softmax(std::span<const double> logits);

/// log(sum(exp(logits))) with max subtraction.
double log_sum_exp(std::span<const double> logits);

/// Logits b . f_m over every flavor m.
std::vector<double> flavor_logits(const EmbeddingModel& model, std::size_t beer);

/// p(f | b) over all flavors.
std::vector<double> flavor_distribution(const EmbeddingModel& model, std::size_t beer);

/// Mean of -log p(f | b) over the pairs. Throws DomainError on an empty corpus.
double corpus_nll(const EmbeddingModel& model, std::span<const Pair> corpus);

}  // namespace brewvec

#endif  // BREWVEC_MODEL_HPP

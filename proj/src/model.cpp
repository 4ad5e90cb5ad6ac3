#include "brewvec/model.hpp"

#include <algorithm>
#include <cmath>

#include "brewvec/errors.hpp"

namespace brewvec {

Vocab::Vocab(std::vector<std::string> items) {
    items_.reserve(items.size());
    for (auto& item : items) {
        if (index_.contains(item)) throw DomainError("duplicate vocabulary entry '" + item + "'");
        index_.emplace(item, items_.size());
        items_.push_back(std::move(item));
    }
}

std::size_t Vocab::add(const std::string& item) {
    auto [it, inserted] = index_.try_emplace(item, items_.size());
    if (inserted) items_.push_back(item);
    return it->second;
}

std::optional<std::size_t> Vocab::find(std::string_view item) const {
    auto it = index_.find(item);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const std::string& Vocab::at(std::size_t ordinal) const {
    if (ordinal >= items_.size()) {
        throw IndexError("ordinal " + std::to_string(ordinal) + " out of range for vocabulary of size " +
                         std::to_string(items_.size()));
    }
    return items_[ordinal];
}

EmbeddingModel::EmbeddingModel(BeerVocab beers, FlavorVocab flavors, Matrix beer_matrix, Matrix flavor_matrix)
    : beers_(std::move(beers)),
      flavors_(std::move(flavors)),
      beer_matrix_(std::move(beer_matrix)),
      flavor_matrix_(std::move(flavor_matrix)) {
    validate();
}

void EmbeddingModel::validate() const {
    if (beer_matrix_.rows() != beers_.size()) {
        throw DomainError("beer matrix has " + std::to_string(beer_matrix_.rows()) + " rows, vocabulary has " +
                          std::to_string(beers_.size()));
    }
    if (flavor_matrix_.rows() != flavors_.size()) {
        throw DomainError("flavor matrix has " + std::to_string(flavor_matrix_.rows()) +
                          " rows, vocabulary has " + std::to_string(flavors_.size()));
    }
    if (beer_matrix_.cols() != flavor_matrix_.cols()) throw DomainError("beer and flavor dimensions differ");
    if (beer_matrix_.cols() == 0) throw DomainError("embedding dimension must be positive");
    if (!beer_matrix_.all_finite() || !flavor_matrix_.all_finite()) {
        throw DomainError("embedding matrices contain non-finite entries");
    }
}

std::span<const double> EmbeddingModel::beer_vector(std::size_t beer) const {
    if (beer >= beer_matrix_.rows()) {
        throw IndexError("beer ordinal " + std::to_string(beer) + " out of range [0, " +
                         std::to_string(beer_matrix_.rows()) + ")");
    }
    return beer_matrix_.row(beer);
}

std::span<const double> EmbeddingModel::flavor_vector(std::size_t flavor) const {
    if (flavor >= flavor_matrix_.rows()) {
        throw IndexError("flavor ordinal " + std::to_string(flavor) + " out of range [0, " +
                         std::to_string(flavor_matrix_.rows()) + ")");
    }
    return flavor_matrix_.row(flavor);
}

double score(const EmbeddingModel& model, std::size_t beer, std::size_t flavor) {
    return dot(model.beer_vector(beer), model.flavor_vector(flavor));
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out(logits.begin(), logits.end());
    if (out.empty()) return out;
    const double peak = *std::max_element(out.begin(), out.end());
    double total = 0.0;
    for (double& v : out) {
        v = std::exp(v - peak);
        total += v;
    }
    for (double& v : out) v /= total;
    return out;
}

double log_sum_exp(std::span<const double> logits) {
    if (logits.empty()) throw DomainError("log_sum_exp of an empty vector");
    const double peak = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double v : logits) total += std::exp(v - peak);
    return peak + std::log(total);
}

std::vector<double> flavor_logits(const EmbeddingModel& model, std::size_t beer) {
    const auto b = model.beer_vector(beer);
    const auto& flavors = model.flavor_matrix();
    std::vector<double> logits(flavors.rows());
    for (std::size_t m = 0; m < flavors.rows(); ++m) logits[m] = dot(b, flavors.row(m));
    return logits;
}

std::vector<double> flavor_distribution(const EmbeddingModel& model, std::size_t beer) {
    return softmax(flavor_logits(model, beer));
}

double corpus_nll(const EmbeddingModel& model, std::span<const Pair> corpus) {
    if (corpus.empty()) throw DomainError("corpus_nll of an empty corpus");
    double total = 0.0;
    for (const Pair& pair : corpus) {
        const auto logits = flavor_logits(model, pair.beer);
        if (pair.flavor >= logits.size()) {
            throw IndexError("flavor ordinal " + std::to_string(pair.flavor) + " out of range");
        }
        total += log_sum_exp(logits) - logits[pair.flavor];
    }
    return total / static_cast<double>(corpus.size());
}

}  // namespace brewvec

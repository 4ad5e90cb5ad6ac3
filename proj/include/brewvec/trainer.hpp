#ifndef BREWVEC_TRAINER_HPP
#define BREWVEC_TRAINER_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "brewvec/ingest.hpp"
#include "brewvec/model.hpp"

namespace brewvec {

struct TrainConfig {
    std::size_t dim = 5;
    double learning_rate = 0.001;
    std::size_t batch_size = 128;
    std::size_t max_epochs = 300;
    std::uint64_t seed = 42;
    bool shuffle = true;
    std::size_t log_every = 1;
};

/// Throws DomainError when a field is out of range.
void validate(const TrainConfig& config);

/// Gradient of the mean batch NLL with respect to both embedding matrices.
struct Gradient {
    Matrix beer;
    Matrix flavor;
    double loss = 0.0;  ///< mean NLL of the batch at the evaluated parameters
};

struct AdamState {
    static constexpr double beta1 = 0.9;
    static constexpr double beta2 = 0.999;
    static constexpr double epsilon = 1e-8;

    Matrix beer_m, beer_v;
    Matrix flavor_m, flavor_v;
    std::uint64_t step = 0;

    static AdamState zeros_like(const EmbeddingModel& model);
};

/// Uniform entries in (-0.5/k, 0.5/k), deterministic for config.seed.
EmbeddingModel init_model(const BeerVocab& beers, const FlavorVocab& flavors, const TrainConfig& config);

/**
 * @brief Full-softmax gradient of the mean NLL over @p batch.
 *
 * For a pair (b, f*) with p = softmax(F b): the flavor row m receives
 * (p_m - [m == f*]) b and the beer row receives F^T p - f_{f*}. Per-pair
 * gradients are summed then divided by the batch size.
 */
Gradient batch_gradient(const EmbeddingModel& model, std::span<const Pair> batch);

/// Same as batch_gradient but reuses @p out's storage.
void batch_gradient(const EmbeddingModel& model, std::span<const Pair> batch, Gradient& out);

/// Bias-corrected Adam update in place. Throws TrainingError on a non-finite gradient.
void adam_step(EmbeddingModel& model, const Gradient& grad, AdamState& state, double learning_rate);

struct TrainReport {
    std::vector<double> epoch_nll;  ///< mean per-pair NLL seen during each epoch
    EmbeddingModel model;
    std::size_t epochs_run = 0;
    double seconds = 0.0;
};

/// Called after every epoch with (1-based epoch, mean NLL).
using EpochCallback = std::function<void(std::size_t, double)>;

/**
 * @brief Minibatch Adam over the flattened pair list.
 *
 * Pairs are reshuffled every epoch with a generator derived from config.seed;
 * the last batch of an epoch may be short. Runs exactly max_epochs epochs.
 */
TrainReport train(const Dataset& dataset, const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace brewvec

#endif  // BREWVEC_TRAINER_HPP

#include "brewvec/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "brewvec/errors.hpp"
#include "brewvec/random.hpp"

namespace brewvec {

namespace {

constexpr std::uint64_t kShuffleStream = 0x9e3779b97f4a7c15ULL;

void adam_update(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v, double lr, double correction1,
                 double correction2) {
    auto p = param.data();
    auto g = grad.data();
    auto mm = m.data();
    auto vv = v.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        mm[i] = AdamState::beta1 * mm[i] + (1.0 - AdamState::beta1) * g[i];
        vv[i] = AdamState::beta2 * vv[i] + (1.0 - AdamState::beta2) * g[i] * g[i];
        const double m_hat = mm[i] / correction1;
        const double v_hat = vv[i] / correction2;
        p[i] -= lr * m_hat / (std::sqrt(v_hat) + AdamState::epsilon);
    }
}

void require_finite(const Matrix& grad, const char* name, std::uint64_t step) {
    const auto data = grad.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data[i])) {
            std::ostringstream msg;
            msg << "non-finite " << name << " gradient at row " << i / grad.cols() << ", column "
                << i % grad.cols() << " (value " << data[i] << ") on Adam step " << step + 1;
            throw TrainingError(msg.str());
        }
    }
}

}  // namespace

void validate(const TrainConfig& config) {
    if (config.dim == 0) throw DomainError("dim must be positive");
    if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
        throw DomainError("learning_rate must be positive and finite");
    }
    if (config.batch_size == 0) throw DomainError("batch_size must be positive");
    if (config.log_every == 0) throw DomainError("log_every must be positive");
}

AdamState AdamState::zeros_like(const EmbeddingModel& model) {
    AdamState state;
    const auto& b = model.beer_matrix();
    const auto& f = model.flavor_matrix();
    state.beer_m = Matrix(b.rows(), b.cols());
    state.beer_v = Matrix(b.rows(), b.cols());
    state.flavor_m = Matrix(f.rows(), f.cols());
    state.flavor_v = Matrix(f.rows(), f.cols());
    return state;
}

EmbeddingModel init_model(const BeerVocab& beers, const FlavorVocab& flavors, const TrainConfig& config) {
    if (beers.empty() || flavors.empty()) throw DomainError("cannot initialize a model with an empty vocabulary");
    if (config.dim == 0) throw DomainError("dim must be positive");
    Rng rng(config.seed);
    const double half_width = 0.5 / static_cast<double>(config.dim);
    auto draw = [&](Matrix& m) {
        for (double& v : m.data()) v = (2.0 * rng.open_unit() - 1.0) * half_width;
    };
    Matrix beer_matrix(beers.size(), config.dim);
    Matrix flavor_matrix(flavors.size(), config.dim);
    draw(beer_matrix);
    draw(flavor_matrix);
    return EmbeddingModel(beers, flavors, std::move(beer_matrix), std::move(flavor_matrix));
}

void batch_gradient(const EmbeddingModel& model, std::span<const Pair> batch, Gradient& out) {
    if (batch.empty()) throw DomainError("batch_gradient of an empty batch");
    const auto& beers = model.beer_matrix();
    const auto& flavors = model.flavor_matrix();
    const std::size_t k = model.dim();

    if (out.beer.rows() != beers.rows() || out.beer.cols() != k) out.beer = Matrix(beers.rows(), k);
    if (out.flavor.rows() != flavors.rows() || out.flavor.cols() != k) out.flavor = Matrix(flavors.rows(), k);
    out.beer.fill(0.0);
    out.flavor.fill(0.0);

    std::vector<double> logits(flavors.rows());
    double loss = 0.0;
    for (const Pair& pair : batch) {
        const auto b = model.beer_vector(pair.beer);
        if (pair.flavor >= flavors.rows()) throw IndexError("flavor ordinal " + std::to_string(pair.flavor) + " out of range");

        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < flavors.rows(); ++m) {
            logits[m] = dot(b, flavors.row(m));
            peak = std::max(peak, logits[m]);
        }
        const double target = logits[pair.flavor] - peak;
        double total = 0.0;
        for (double& z : logits) {
            z = std::exp(z - peak);
            total += z;
        }
        loss += std::log(total) - target;

        auto beer_grad = out.beer.row(pair.beer);
        for (std::size_t m = 0; m < flavors.rows(); ++m) {
            const double p = logits[m] / total;
            const double coeff = p - (m == pair.flavor ? 1.0 : 0.0);
            auto flavor_grad = out.flavor.row(m);
            const auto f = flavors.row(m);
            for (std::size_t d = 0; d < k; ++d) {
                flavor_grad[d] += coeff * b[d];
                beer_grad[d] += coeff * f[d];
            }
        }
    }

    const double scale = 1.0 / static_cast<double>(batch.size());
    for (double& v : out.beer.data()) v *= scale;
    for (double& v : out.flavor.data()) v *= scale;
    out.loss = loss * scale;
}

Gradient batch_gradient(const EmbeddingModel& model, std::span<const Pair> batch) {
    Gradient grad;
    batch_gradient(model, batch, grad);
    return grad;
}

void adam_step(EmbeddingModel& model, const Gradient& grad, AdamState& state, double learning_rate) {
    auto& beers = model.mutable_beer_matrix();
    auto& flavors = model.mutable_flavor_matrix();
    if (grad.beer.rows() != beers.rows() || grad.beer.cols() != beers.cols() ||
        grad.flavor.rows() != flavors.rows() || grad.flavor.cols() != flavors.cols()) {
        throw DomainError("gradient shape does not match the model");
    }
    if (state.beer_m.rows() != beers.rows() || state.flavor_m.rows() != flavors.rows()) {
        throw DomainError("Adam state shape does not match the model");
    }
    require_finite(grad.beer, "beer", state.step);
    require_finite(grad.flavor, "flavor", state.step);

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(AdamState::beta1, t);
    const double correction2 = 1.0 - std::pow(AdamState::beta2, t);
    adam_update(beers, grad.beer, state.beer_m, state.beer_v, learning_rate, correction1, correction2);
    adam_update(flavors, grad.flavor, state.flavor_m, state.flavor_v, learning_rate, correction1, correction2);

    if (!beers.all_finite() || !flavors.all_finite()) {
        throw TrainingError("parameters became non-finite on Adam step " + std::to_string(state.step));
    }
}

TrainReport train(const Dataset& dataset, const TrainConfig& config, const EpochCallback& on_epoch) {
    validate(config);
    if (dataset.pairs.empty()) throw DomainError("dataset has no training pairs");

    const auto started = std::chrono::steady_clock::now();
    TrainReport report{{}, init_model(dataset.beers, dataset.flavors, config), 0, 0.0};
    EmbeddingModel& model = report.model;
    AdamState state = AdamState::zeros_like(model);
    Gradient grad;

    std::vector<Pair> order = dataset.pairs;
    Rng shuffler(config.seed ^ kShuffleStream);
    const std::span<const Pair> all(order);

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        if (config.shuffle) {
            for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[shuffler.below(i + 1)]);
        }
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const auto batch = all.subspan(start, std::min(config.batch_size, order.size() - start));
            batch_gradient(model, batch, grad);
            loss_sum += grad.loss * static_cast<double>(batch.size());
            adam_step(model, grad, state, config.learning_rate);
        }
        const double epoch_nll = loss_sum / static_cast<double>(order.size());
        report.epoch_nll.push_back(epoch_nll);
        report.epochs_run = epoch;
        if (on_epoch && (epoch % config.log_every == 0 || epoch == config.max_epochs)) on_epoch(epoch, epoch_nll);
    }

    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

}  // namespace brewvec

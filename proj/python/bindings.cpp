#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>

#include "brewvec/errors.hpp"
#include "brewvec/ingest.hpp"
#include "brewvec/model_store.hpp"
#include "brewvec/pca.hpp"
#include "brewvec/retrieval.hpp"
#include "brewvec/trainer.hpp"

namespace py = pybind11;
using namespace brewvec;

namespace {

py::array_t<double> to_numpy(const Matrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    auto view = out.mutable_unchecked<2>();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) view(r, c) = m(r, c);
    }
    return out;
}

std::vector<std::pair<std::string, double>> to_pairs(const RankedResult& result) {
    std::vector<std::pair<std::string, double>> out;
    out.reserve(result.entries.size());
    for (const auto& e : result.entries) out.emplace_back(e.id, e.score);
    return out;
}

Aggregate parse_aggregate(const std::string& name) {
    if (name == "mean") return Aggregate::mean;
    if (name == "max") return Aggregate::max;
    throw ValidationError("aggregate must be 'mean' or 'max'");
}

Similarity parse_similarity(bool cosine) { return cosine ? Similarity::cosine : Similarity::dot; }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Skip-gram flavor embeddings for beers";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<NotFoundError>(m, "NotFoundError", PyExc_KeyError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<TrainingError>(m, "TrainingError", base.ptr());
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<IndexError>(m, "IndexError", PyExc_IndexError);

    py::class_<Dataset>(m, "Dataset")
        .def_property_readonly("beers", [](const Dataset& d) { return d.beers.items(); })
        .def_property_readonly("flavors", [](const Dataset& d) { return d.flavors.items(); })
        .def_property_readonly("pair_count", [](const Dataset& d) { return d.pairs.size(); })
        .def_property_readonly("checkin_counts", [](const Dataset& d) { return d.stats.checkin_count; })
        .def_property_readonly("mean_ratings", [](const Dataset& d) { return d.stats.mean_rating; })
        .def("count_matrix", [](const Dataset& d) { return to_numpy(build_count_matrix(d).to_matrix()); });

    m.def(
        "load_checkins",
        [](const std::string& path, std::size_t min_checkins) {
            std::ifstream in(path);
            if (!in) throw IoError("cannot open check-in file '" + path + "'");
            DatasetOptions options;
            options.min_checkins = min_checkins;
            return build_dataset(parse_checkins(in).checkins, options);
        },
        py::arg("path"), py::arg("min_checkins") = 1, "Parse a check-in JSONL file into a Dataset.");

    m.def(
        "synthetic",
        [](std::size_t clusters, std::size_t beers_per, std::size_t flavors_per, std::size_t checkins_per,
           std::size_t tags_per, double noise, std::uint64_t seed) {
            SyntheticCorpus corpus = generate_synthetic(
                {clusters, beers_per, flavors_per, checkins_per, tags_per, noise, seed});
            return py::make_tuple(std::move(corpus.dataset), corpus.truth.cluster);
        },
        py::arg("clusters") = 3, py::arg("beers_per") = 10, py::arg("flavors_per") = 5, py::arg("checkins_per") = 50,
        py::arg("tags_per") = 3, py::arg("noise") = 0.1, py::arg("seed") = 7,
        "Clustered synthetic corpus; returns (dataset, {beer_id: cluster}).");

    py::class_<ModelBundle>(m, "Model")
        .def_static("load", &load_model, py::arg("path"))
        .def("save", [](const ModelBundle& b, const std::filesystem::path& path) { save_model(b.model, b.stats, path); })
        .def_property_readonly("beers", [](const ModelBundle& b) { return b.model.beers().items(); })
        .def_property_readonly("flavors", [](const ModelBundle& b) { return b.model.flavors().items(); })
        .def_property_readonly("dim", [](const ModelBundle& b) { return b.model.dim(); })
        .def_property_readonly("beer_matrix", [](const ModelBundle& b) { return to_numpy(b.model.beer_matrix()); })
        .def_property_readonly("flavor_matrix", [](const ModelBundle& b) { return to_numpy(b.model.flavor_matrix()); })
        .def("flavor_distribution",
             [](const ModelBundle& b, const std::string& beer) {
                 return flavor_distribution(b.model, require_beer(b.model, beer));
             })
        .def(
            "similar_beers",
            [](const ModelBundle& b, const std::string& beer, std::size_t n, bool cosine) {
                return to_pairs(similar_beers(b.model, beer, n, parse_similarity(cosine)));
            },
            py::arg("beer"), py::arg("n") = 10, py::arg("cosine") = false)
        .def(
            "describe_beer",
            [](const ModelBundle& b, const std::string& beer, std::size_t n, bool cosine) {
                return to_pairs(describe_beer(b.model, beer, n, parse_similarity(cosine)));
            },
            py::arg("beer"), py::arg("n") = 3, py::arg("cosine") = false)
        .def(
            "recommend",
            [](const ModelBundle& b, const std::vector<std::string>& favorites, std::size_t n,
               const std::string& aggregate) {
                return to_pairs(recommend_from_favorites(b.model, favorites, n, parse_aggregate(aggregate)));
            },
            py::arg("favorites"), py::arg("n") = 10, py::arg("aggregate") = "mean")
        .def(
            "profile_search",
            [](const ModelBundle& b, const std::vector<std::pair<std::string, double>>& profile, std::size_t n,
               bool cosine) {
                std::vector<FlavorWeight> weights;
                for (const auto& [tag, w] : profile) weights.push_back({tag, w});
                return to_pairs(profile_search(b.model, weights, n, parse_similarity(cosine)));
            },
            py::arg("profile"), py::arg("n") = 10, py::arg("cosine") = false)
        .def(
            "flavor_arithmetic",
            [](const ModelBundle& b, const std::string& base_beer, const std::vector<std::string>& minus,
               const std::vector<std::string>& plus, std::size_t n, bool cosine) {
                return to_pairs(flavor_arithmetic(b.model, base_beer, minus, plus, n, parse_similarity(cosine)));
            },
            py::arg("base"), py::arg("minus") = std::vector<std::string>{},
            py::arg("plus") = std::vector<std::string>{}, py::arg("n") = 10, py::arg("cosine") = false)
        .def("project_flavors_2d", [](const ModelBundle& b) { return to_numpy(project_flavors_2d(b.model)); });

    m.def(
        "train",
        [](const Dataset& dataset, std::size_t dim, double lr, std::size_t batch, std::size_t epochs,
           std::uint64_t seed) {
            TrainConfig config;
            config.dim = dim;
            config.learning_rate = lr;
            config.batch_size = batch;
            config.max_epochs = epochs;
            config.seed = seed;
            TrainReport report = [&] {
                py::gil_scoped_release release;
                return train(dataset, config);
            }();
            return py::make_tuple(ModelBundle{std::move(report.model), dataset.stats}, report.epoch_nll);
        },
        py::arg("dataset"), py::arg("dim") = 5, py::arg("lr") = 0.001, py::arg("batch") = 128,
        py::arg("epochs") = 300, py::arg("seed") = 42, "Train embeddings; returns (model, per-epoch NLL).");

    m.def(
        "pca_beer_vectors",
        [](const Dataset& dataset, std::size_t components) {
            return to_numpy(pca_beer_vectors(build_count_matrix(dataset), components));
        },
        py::arg("dataset"), py::arg("components") = 5);
}

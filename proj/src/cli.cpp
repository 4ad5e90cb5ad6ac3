#include "brewvec/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "brewvec/errors.hpp"
#include "brewvec/ingest.hpp"
#include "brewvec/model_store.hpp"
#include "brewvec/pca.hpp"
#include "brewvec/result_json.hpp"
#include "brewvec/retrieval.hpp"
#include "brewvec/server.hpp"
#include "brewvec/trainer.hpp"

namespace brewvec {

using nlohmann::json;

namespace {

/// Flag combination CLI11 cannot express (e.g. mismatched list lengths).
class UsageError : public Error {
public:
    using Error::Error;
};

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string quoted = "\"";
    for (char c : text) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + '"';
}

std::vector<CheckIn> read_checkins(const std::string& path, std::ostream& err) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open check-in file '" + path + "'");
    ParseResult parsed = parse_checkins(in);
    if (in.bad()) throw IoError("failed reading '" + path + "'");
    if (parsed.dropped_empty > 0) {
        err << "warning: dropped " << parsed.dropped_empty << " check-in(s) with no flavors\n";
    }
    return std::move(parsed.checkins);
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

Dataset load_dataset(const std::string& input, std::size_t min_checkins, const std::string& vocab_path,
                     std::ostream& err) {
    DatasetOptions options;
    options.min_checkins = min_checkins;
    if (!vocab_path.empty()) options.allowed_flavors = read_lines(vocab_path);
    DatasetWarnings warnings;
    Dataset dataset = build_dataset(read_checkins(input, err), options, &warnings);
    if (warnings.unknown_tags > 0) {
        err << "warning: dropped " << warnings.unknown_tags << " tag(s) outside the flavor vocabulary\n";
    }
    if (warnings.emptied_checkins > 0) {
        err << "warning: dropped " << warnings.emptied_checkins << " check-in(s) left without flavors\n";
    }
    if (warnings.filtered_beers > 0) {
        err << "warning: filtered " << warnings.filtered_beers << " beer(s) below " << min_checkins
            << " check-ins\n";
    }
    return dataset;
}

template <typename Write>
void write_file(const std::string& path, Write&& write) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write(out);
    out.flush();
    if (!out) throw IoError("failed writing '" + path + "'");
}

void print_ranked(std::ostream& out, const RankedResult& result) {
    out << "# " << result.query << '\n';
    std::size_t width = 2;
    for (const auto& entry : result.entries) width = std::max(width, entry.id.size());
    for (std::size_t i = 0; i < result.entries.size(); ++i) {
        const auto& entry = result.entries[i];
        out << std::setw(3) << i + 1 << "  " << std::left << std::setw(static_cast<int>(width)) << entry.id
            << std::right << "  " << std::fixed << std::setprecision(6) << entry.score << '\n';
        out.unsetf(std::ios::floatfield);
    }
}

struct QueryOptions {
    std::string model_path;
    std::size_t n = 10;
    bool json = false;
    bool cosine = false;
};

void add_query_options(CLI::App* cmd, QueryOptions& opts, std::size_t default_n) {
    opts.n = default_n;
    cmd->add_option("--model", opts.model_path, "Model file")->required();
    cmd->add_option("-n,--n", opts.n, "Number of results")->check(CLI::PositiveNumber);
    cmd->add_flag("--json", opts.json, "Print the result as JSON");
}

Similarity similarity_of(const QueryOptions& opts) { return opts.cosine ? Similarity::cosine : Similarity::dot; }

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Flavor embeddings for beers: train, query and serve", "brewvec"};
    app.require_subcommand(1, 1);

    // train
    std::string train_input, train_output, train_vocab;
    TrainConfig train_config;
    std::size_t min_checkins = 1;
    bool quiet = false;
    auto* train_cmd = app.add_subcommand("train", "Train embeddings from a check-in file");
    train_cmd->add_option("--input", train_input, "Check-in JSONL file")->required();
    train_cmd->add_option("--output", train_output, "Model file to write")->required();
    train_cmd->add_option("--dim", train_config.dim, "Embedding dimension")->capture_default_str()->check(CLI::PositiveNumber);
    train_cmd->add_option("--lr", train_config.learning_rate, "Adam learning rate")->capture_default_str()->check(CLI::PositiveNumber);
    train_cmd->add_option("--batch", train_config.batch_size, "Batch size in pairs")->capture_default_str()->check(CLI::PositiveNumber);
    train_cmd->add_option("--epochs", train_config.max_epochs, "Epochs")->capture_default_str()->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--seed", train_config.seed, "Random seed")->capture_default_str();
    train_cmd->add_option("--min-checkins", min_checkins, "Drop beers with fewer check-ins")->capture_default_str()->check(CLI::PositiveNumber);
    train_cmd->add_option("--log-every", train_config.log_every, "Print NLL every N epochs")->capture_default_str()->check(CLI::PositiveNumber);
    train_cmd->add_option("--flavor-vocab", train_vocab, "Restrict tags to this list (one per line)");
    train_cmd->add_flag("--quiet", quiet, "Do not print per-epoch NLL");

    // synth
    SyntheticSpec synth_spec;
    std::string synth_output, synth_truth;
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic clustered check-in corpus");
    synth_cmd->add_option("--clusters", synth_spec.n_clusters)->capture_default_str()->check(CLI::PositiveNumber);
    synth_cmd->add_option("--beers-per", synth_spec.beers_per_cluster)->capture_default_str()->check(CLI::PositiveNumber);
    synth_cmd->add_option("--flavors-per", synth_spec.flavors_per_cluster)->capture_default_str()->check(CLI::PositiveNumber);
    synth_cmd->add_option("--checkins-per", synth_spec.checkins_per_beer)->capture_default_str()->check(CLI::PositiveNumber);
    synth_cmd->add_option("--tags-per", synth_spec.tags_per_checkin)->capture_default_str()->check(CLI::PositiveNumber);
    synth_cmd->add_option("--noise", synth_spec.noise_rate)->capture_default_str();
    synth_cmd->add_option("--seed", synth_spec.seed)->capture_default_str();
    synth_cmd->add_option("--output", synth_output, "Check-in JSONL file")->required();
    synth_cmd->add_option("--truth", synth_truth, "Ground-truth JSON (default: <output>.truth.json)");

    // queries
    QueryOptions similar_opts;
    std::string similar_beer;
    auto* similar_cmd = app.add_subcommand("similar", "Beers closest to a beer");
    add_query_options(similar_cmd, similar_opts, 10);
    similar_cmd->add_option("--beer", similar_beer, "Query beer id")->required();
    similar_cmd->add_flag("--cosine", similar_opts.cosine, "Cosine instead of dot product");

    QueryOptions describe_opts;
    std::string describe_beer_id;
    auto* describe_cmd = app.add_subcommand("describe", "Prevalent flavors of a beer");
    add_query_options(describe_cmd, describe_opts, 3);
    describe_cmd->add_option("--beer", describe_beer_id, "Beer id")->required();
    describe_cmd->add_flag("--cosine", describe_opts.cosine, "Cosine instead of dot product");

    QueryOptions recommend_opts;
    std::vector<std::string> favorites;
    std::string aggregate_name = "mean";
    auto* recommend_cmd = app.add_subcommand("recommend", "Beers for a list of favorites");
    add_query_options(recommend_cmd, recommend_opts, 10);
    recommend_cmd->add_option("--favorites", favorites, "Favorite beer ids")->required();
    recommend_cmd->add_option("--aggregate", aggregate_name, "mean or max")
        ->capture_default_str()
        ->check(CLI::IsMember({"mean", "max"}));

    QueryOptions profile_opts;
    std::vector<std::string> profile_tags;
    std::vector<double> profile_weights;
    auto* profile_cmd = app.add_subcommand("profile", "Beers matching a weighted flavor profile");
    add_query_options(profile_cmd, profile_opts, 10);
    profile_cmd->add_option("--flavors", profile_tags, "Flavor tags")->required();
    profile_cmd->add_option("--weights", profile_weights, "One weight per tag, summing to 1")->required();
    profile_cmd->add_flag("--cosine", profile_opts.cosine, "Cosine instead of dot product");

    QueryOptions arith_opts;
    std::string arith_base;
    std::vector<std::string> arith_minus, arith_plus;
    auto* arith_cmd = app.add_subcommand("arith", "Flavor arithmetic: base - minus + plus");
    add_query_options(arith_cmd, arith_opts, 10);
    arith_cmd->add_option("--base", arith_base, "Base beer id")->required();
    arith_cmd->add_option("--minus", arith_minus, "Tags to subtract");
    arith_cmd->add_option("--plus", arith_plus, "Tags to add");
    arith_cmd->add_flag("--cosine", arith_opts.cosine, "Cosine instead of dot product");

    // pca-baseline
    std::string pca_input, pca_output;
    std::size_t pca_components = 5;
    std::size_t pca_min_checkins = 1;
    auto* pca_cmd = app.add_subcommand("pca-baseline", "PCA beer vectors from the flavor count matrix");
    pca_cmd->add_option("--input", pca_input, "Check-in JSONL file")->required();
    pca_cmd->add_option("--components", pca_components)->capture_default_str()->check(CLI::PositiveNumber);
    pca_cmd->add_option("--min-checkins", pca_min_checkins)->capture_default_str()->check(CLI::PositiveNumber);
    pca_cmd->add_option("--output", pca_output, "CSV file")->required();

    // export-2d
    std::string export_model, export_output;
    auto* export_cmd = app.add_subcommand("export-2d", "2D PCA coordinates of the flavor embeddings");
    export_cmd->add_option("--model", export_model, "Model file")->required();
    export_cmd->add_option("--output", export_output, "CSV file")->required();

    // serve
    ApiConfig api_config;
    std::string bind;
    std::string serve_model;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP JSON API");
    serve_cmd->add_option("--model", serve_model, "Model file")->envname("BREWVEC_MODEL")->required();
    serve_cmd->add_option("--bind", bind, "host:port (default 127.0.0.1:8642)");
    serve_cmd->add_option("--cors", api_config.cors_origin, "Allowed CORS origin")->capture_default_str();
    serve_cmd->add_option("--max-n", api_config.max_n, "Largest n per query")->capture_default_str()->check(CLI::PositiveNumber);

    std::vector<const char*> argv{"brewvec"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        err << app.help();
        return kExitUsage;
    }

    auto load = [](const std::string& path) { return load_model(path); };
    auto emit = [&](const QueryOptions& opts, const ModelBundle& bundle, const RankedResult& result, json query,
                    bool flavor_rows) {
        if (opts.json) {
            const ResultFormatter formatter(bundle.model, bundle.stats);
            const json body = flavor_rows ? formatter.flavors(result, std::move(query))
                                          : formatter.beers(result, std::move(query));
            out << body.dump(2) << '\n';
        } else {
            print_ranked(out, result);
        }
    };

    try {
        if (*train_cmd) {
            const Dataset dataset = load_dataset(train_input, min_checkins, train_vocab, err);
            err << "training on " << dataset.pairs.size() << " pairs: " << dataset.beers.size() << " beers, "
                << dataset.flavors.size() << " flavors\n";
            EpochCallback log;
            if (!quiet) {
                log = [&](std::size_t epoch, double nll) {
                    out << "epoch " << epoch << " nll " << format_double(nll) << '\n';
                };
            }
            const TrainReport report = train(dataset, train_config, log);
            save_model(report.model, dataset.stats, train_output);
            err << "saved " << train_output << " after " << report.epochs_run << " epochs\n";
        } else if (*synth_cmd) {
            SyntheticTruth truth;
            const auto checkins = generate_synthetic_checkins(synth_spec, &truth);
            write_file(synth_output, [&](std::ostream& f) { write_checkins(f, checkins); });
            json beers = json::object();
            for (const auto& [id, cluster] : truth.cluster) {
                beers[id] = {{"cluster", cluster}, {"pool", truth.pool.at(id)}};
            }
            const json sidecar = {{"spec",
                                   {{"clusters", synth_spec.n_clusters},
                                    {"beers_per", synth_spec.beers_per_cluster},
                                    {"flavors_per", synth_spec.flavors_per_cluster},
                                    {"checkins_per", synth_spec.checkins_per_beer},
                                    {"tags_per", synth_spec.tags_per_checkin},
                                    {"noise", synth_spec.noise_rate},
                                    {"seed", synth_spec.seed}}},
                                  {"beers", std::move(beers)}};
            const std::string truth_path = synth_truth.empty() ? synth_output + ".truth.json" : synth_truth;
            write_file(truth_path, [&](std::ostream& f) { f << sidecar.dump(2) << '\n'; });
            err << "wrote " << checkins.size() << " check-ins to " << synth_output << " and truth to " << truth_path
                << '\n';
        } else if (*similar_cmd) {
            const ModelBundle bundle = load(similar_opts.model_path);
            const auto result = similar_beers(bundle.model, similar_beer, similar_opts.n, similarity_of(similar_opts));
            emit(similar_opts, bundle, result, {{"type", "similar"}, {"beer", similar_beer}, {"n", similar_opts.n}},
                 false);
        } else if (*describe_cmd) {
            const ModelBundle bundle = load(describe_opts.model_path);
            const auto result =
                describe_beer(bundle.model, describe_beer_id, describe_opts.n, similarity_of(describe_opts));
            emit(describe_opts, bundle, result,
                 {{"type", "describe"}, {"beer", describe_beer_id}, {"n", describe_opts.n}}, true);
        } else if (*recommend_cmd) {
            const ModelBundle bundle = load(recommend_opts.model_path);
            const Aggregate aggregate = aggregate_name == "max" ? Aggregate::max : Aggregate::mean;
            const auto result = recommend_from_favorites(bundle.model, favorites, recommend_opts.n, aggregate);
            emit(recommend_opts, bundle, result,
                 {{"type", "recommend"}, {"favorites", favorites}, {"n", recommend_opts.n}, {"aggregate", aggregate_name}},
                 false);
        } else if (*profile_cmd) {
            if (profile_tags.size() != profile_weights.size()) {
                throw UsageError("--flavors has " + std::to_string(profile_tags.size()) + " tags but --weights has " +
                                 std::to_string(profile_weights.size()) + " values");
            }
            const ModelBundle bundle = load(profile_opts.model_path);
            std::vector<FlavorWeight> profile;
            json echo = json::array();
            for (std::size_t i = 0; i < profile_tags.size(); ++i) {
                profile.push_back({profile_tags[i], profile_weights[i]});
                echo.push_back({{"tag", profile_tags[i]}, {"weight", profile_weights[i]}});
            }
            const auto result = profile_search(bundle.model, profile, profile_opts.n, similarity_of(profile_opts));
            emit(profile_opts, bundle, result, {{"type", "profile"}, {"flavors", echo}, {"n", profile_opts.n}}, false);
        } else if (*arith_cmd) {
            const ModelBundle bundle = load(arith_opts.model_path);
            const auto result = flavor_arithmetic(bundle.model, arith_base, arith_minus, arith_plus, arith_opts.n,
                                                  similarity_of(arith_opts));
            emit(arith_opts, bundle, result,
                 {{"type", "arithmetic"},
                  {"base", arith_base},
                  {"minus", arith_minus},
                  {"plus", arith_plus},
                  {"n", arith_opts.n}},
                 false);
        } else if (*pca_cmd) {
            const Dataset dataset = load_dataset(pca_input, pca_min_checkins, "", err);
            const CountMatrix counts = build_count_matrix(dataset);
            const Matrix vectors = pca_beer_vectors(counts, pca_components);
            write_file(pca_output, [&](std::ostream& f) {
                f << "beer";
                for (std::size_t c = 0; c < vectors.cols(); ++c) f << ",pc" << c + 1;
                f << '\n';
                for (std::size_t b = 0; b < vectors.rows(); ++b) {
                    f << csv_field(dataset.beers.at(b));
                    for (double v : vectors.row(b)) f << ',' << format_double(v);
                    f << '\n';
                }
            });
        } else if (*export_cmd) {
            const ModelBundle bundle = load(export_model);
            const Matrix coords = project_flavors_2d(bundle.model);
            write_file(export_output, [&](std::ostream& f) {
                f << "flavor,x,y\n";
                for (std::size_t i = 0; i < coords.rows(); ++i) {
                    f << csv_field(bundle.model.flavors().at(i)) << ',' << format_double(coords(i, 0)) << ','
                      << format_double(coords(i, 1)) << '\n';
                }
            });
        } else if (*serve_cmd) {
            api_config.model_path = serve_model;
            if (!bind.empty()) parse_bind(bind, api_config);
            serve(api_config);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

}  // namespace brewvec

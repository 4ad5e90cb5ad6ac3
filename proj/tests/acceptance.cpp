// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "brewvec/errors.hpp"
#include "brewvec/ingest.hpp"
#include "brewvec/model_store.hpp"
#include "brewvec/pca.hpp"
#include "brewvec/retrieval.hpp"
#include "brewvec/server.hpp"
#include "brewvec/trainer.hpp"
#include "oracles.hpp"

using namespace brewvec;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
        outcome = body();
    } catch (const std::exception& e) {
        outcome = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!outcome.pass) ++failures;
    std::printf("%s  %-28s %s [%.2fs]\n", outcome.pass ? "PASS" : "FAIL", name.c_str(), outcome.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c);
    return buf;
}

// The reference synthetic corpus, trained once with the default configuration.
struct Reference {
    SyntheticCorpus corpus;
    TrainReport report;
};

const Reference& reference() {
    static const Reference ref = [] {
        SyntheticCorpus corpus = generate_synthetic(SyntheticSpec{});
        TrainReport report = train(corpus.dataset, TrainConfig{});
        return Reference{std::move(corpus), std::move(report)};
    }();
    return ref;
}

// Mean fraction of each beer's top-3 neighbours that share its cluster.
double top3_agreement(const std::vector<std::string>& ids, const Matrix& vectors, const SyntheticTruth& truth) {
    double total = 0.0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const std::size_t self[] = {i};
        const auto top = rank_by_dot(ids, vectors, vectors.row(i), 3, self);
        for (const auto& e : top.entries) total += truth.cluster.at(e.id) == truth.cluster.at(ids[i]) ? 1.0 : 0.0;
    }
    return total / (3.0 * static_cast<double>(ids.size()));
}

std::string read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / ("brewvec_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

Outcome gradient_correctness() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(2024);
    double worst = 0.0;
    std::size_t coords = 0;
    const int models = 30;
    for (int trial = 0; trial < models; ++trial) {
        const std::size_t nb = 1 + rng.below(5), nf = 1 + rng.below(8), k = 1 + rng.below(3);
        const auto model = oracle::random_model(rng, nb, nf, k);
        std::vector<Pair> batch;
        const std::size_t size = 1 + rng.below(16);
        for (std::size_t i = 0; i < size; ++i) batch.push_back({rng.below(nb), rng.below(nf)});
        const auto analytic = batch_gradient(model, batch);
        const auto [gb, gf] = oracle::finite_difference_gradient(oracle::to_rows(model.beer_matrix()),
                                                                  oracle::to_rows(model.flavor_matrix()), batch, 1e-5);
        for (std::size_t r = 0; r < nb; ++r) {
            for (std::size_t c = 0; c < k; ++c, ++coords) worst = std::max(worst, oracle::relative_error(analytic.beer(r, c), gb[r][c]));
        }
        for (std::size_t r = 0; r < nf; ++r) {
            for (std::size_t c = 0; c < k; ++c, ++coords) worst = std::max(worst, oracle::relative_error(analytic.flavor(r, c), gf[r][c]));
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {worst < 1e-5 && secs < 10.0,
            std::to_string(models) + " models, " + std::to_string(coords) + " coords, " +
                fmt("max rel err %.3g (< 1e-5)", worst)};
}

Outcome training_efficacy() {
    const auto& ref = reference();
    const auto& model = ref.report.model;
    const auto& nll = ref.report.epoch_nll;
    std::size_t in_pool = 0, same_cluster = 0;
    for (const auto& id : model.beers().items()) {
        const auto flavor = describe_beer(model, id, 1).entries.at(0).id;
        in_pool += ref.corpus.truth.pool.at(id).count(flavor);
        const auto neighbour = similar_beers(model, id, 1).entries.at(0).id;
        same_cluster += ref.corpus.truth.cluster.at(neighbour) == ref.corpus.truth.cluster.at(id);
    }
    const double n = static_cast<double>(model.beers().size());
    const double describe_rate = in_pool / n, similar_rate = same_cluster / n;
    const bool pass = nll.back() < nll.front() && describe_rate >= 0.8 && similar_rate >= 0.9 && ref.report.seconds < 120.0;
    return {pass, fmt("nll %.4f -> %.4f, ", nll.front(), nll.back()) +
                      fmt("describe top-1 in pool %.3f (>= 0.8), similar top-1 same cluster %.3f (>= 0.9), ",
                          describe_rate, similar_rate) +
                      std::to_string(nll.size()) + " epochs" + fmt(" in %.1fs (< 120s)", ref.report.seconds)};
}

Outcome baseline_comparison() {
    const auto& ref = reference();
    const auto& dataset = ref.corpus.dataset;
    const auto& ids = dataset.beers.items();
    const double b2v = top3_agreement(ids, ref.report.model.beer_matrix(), ref.corpus.truth);
    const CountMatrix counts = build_count_matrix(dataset);
    const std::size_t max_c = std::min(counts.rows - 1, counts.cols);
    double pca5 = 0.0;
    std::string sweep;
    for (std::size_t c : {std::size_t{5}, std::size_t{10}, std::size_t{20}}) {
        const std::size_t used = std::min(c, max_c);
        const double rate = top3_agreement(ids, pca_beer_vectors(counts, used), ref.corpus.truth);
        if (c == 5) pca5 = rate;
        sweep += " c=" + std::to_string(used) + ":" + fmt("%.3f", rate);
    }
    return {b2v >= pca5, fmt("beer2vec top-3 agreement %.3f vs PCA(c=5) %.3f;", b2v, pca5) + " PCA sweep" + sweep};
}

// Beers whose tags come from a pair of base flavors. Every unordered pair is a
// cluster, so each {X,Y} beer has {X,Z} counterparts for every other Z.
Outcome flavor_arithmetic_criterion() {
    const std::vector<std::string> tags{"citrus", "roast", "smoke", "sour", "malt", "floral"};
    const std::size_t beers_per_pair = 3, checkins_per_beer = 40;
    const double noise = 0.1;
    Rng rng(99);
    std::map<std::string, std::set<std::size_t>> pool;
    std::vector<CheckIn> checkins;
    for (std::size_t x = 0; x < tags.size(); ++x) {
        for (std::size_t y = x + 1; y < tags.size(); ++y) {
            for (std::size_t j = 0; j < beers_per_pair; ++j) {
                const std::string id = tags[x] + "-" + tags[y] + "/beer" + std::to_string(j);
                pool[id] = {x, y};
                for (std::size_t c = 0; c < checkins_per_beer; ++c) {
                    std::vector<std::string> flavors{tags[x], tags[y]};
                    if (rng.unit() < noise) {
                        std::size_t other;
                        do other = rng.below(tags.size());
                        while (other == x || other == y);
                        flavors[rng.below(2)] = tags[other];
                    }
                    checkins.push_back({id, flavors, std::nullopt, {}, {}});
                }
            }
        }
    }
    const Dataset dataset = build_dataset(checkins);
    const auto model = train(dataset, TrainConfig{}).model;

    std::size_t cases = 0, hits = 0;
    for (const auto& [id, members] : pool) {
        for (std::size_t y : members) {
            const std::size_t x = *members.begin() == y ? *members.rbegin() : *members.begin();
            for (std::size_t z = 0; z < tags.size(); ++z) {
                if (members.count(z)) continue;
                const auto top = flavor_arithmetic(model, id, {tags[y]}, {tags[z]}, 3);
                const std::set<std::size_t> want{x, z};
                bool hit = false;
                for (const auto& e : top.entries) hit = hit || pool.at(e.id) == want;
                hits += hit;
                ++cases;
            }
        }
    }
    const double rate = static_cast<double>(hits) / static_cast<double>(cases);
    return {rate >= 0.6, std::to_string(cases) + " cases, {X,Z} beer in top-3 for " + fmt("%.3f (>= 0.6)", rate)};
}

Outcome pca_oracle() {
    Rng rng(4242);
    double worst = 0.0;
    int fits = 0;
    for (std::size_t d = 2; d <= 20; ++d) {
        for (int rep = 0; rep < 3; ++rep, ++fits) {
            const std::size_t n = d + 1 + rng.below(20);
            const Matrix data = oracle::random_matrix(rng, n, d, 3.0);
            const std::size_t c = std::min(n - 1, d);
            const PcaModel pca = fit_pca(data, c);
            const auto truth = oracle::jacobi_eigen(oracle::covariance(oracle::to_rows(data)));
            for (std::size_t j = 0; j < c; ++j) {
                worst = std::max(worst, std::abs(pca.explained_variance[j] - truth.values[j]));
                double same = 0.0, flipped = 0.0;
                for (std::size_t i = 0; i < d; ++i) {
                    same = std::max(same, std::abs(pca.components(j, i) - truth.vectors[j][i]));
                    flipped = std::max(flipped, std::abs(pca.components(j, i) + truth.vectors[j][i]));
                }
                worst = std::max(worst, std::min(same, flipped));
            }
        }
    }
    return {worst < 1e-6, std::to_string(fits) + " fits up to 20x20, " + fmt("max deviation %.3g (< 1e-6)", worst)};
}

bool same_ranking(const RankedResult& got, const std::vector<RankedEntry>& want) {
    if (got.entries.size() != want.size()) return false;
    for (std::size_t i = 0; i < want.size(); ++i) {
        if (got.entries[i].id != want[i].id || std::abs(got.entries[i].score - want[i].score) > 1e-12) return false;
    }
    return true;
}

Outcome retrieval_oracle() {
    Rng rng(1000);
    const std::size_t nb = 1000, nf = 40, k = 8;
    const auto model = oracle::random_model(rng, nb, nf, k);
    const auto& beer_ids = model.beers().items();
    const auto& flavor_ids = model.flavors().items();
    const auto beers = oracle::to_rows(model.beer_matrix());
    const auto flavors = oracle::to_rows(model.flavor_matrix());

    std::map<std::string, int> checked, mismatched;
    const char* ops[] = {"similar", "describe", "recommend-mean", "recommend-max", "profile", "arithmetic"};
    for (int q = 0; q < 200; ++q) {
        const std::string op = ops[q % 6];
        const std::size_t n = 1 + rng.below(op == "describe" ? nf : 60);
        RankedResult got;
        std::vector<RankedEntry> want;
        if (op == "similar") {
            const std::size_t b = rng.below(nb);
            got = similar_beers(model, beer_ids[b], n);
            want = oracle::scan_rank(beer_ids, beers, beers[b], n, {b});
        } else if (op == "describe") {
            const std::size_t b = rng.below(nb);
            got = describe_beer(model, beer_ids[b], n);
            want = oracle::scan_rank(flavor_ids, flavors, beers[b], n);
        } else if (op.rfind("recommend", 0) == 0) {
            std::set<std::size_t> favs;
            const std::size_t count = 1 + rng.below(5);
            while (favs.size() < count) favs.insert(rng.below(nb));
            std::vector<std::string> names;
            for (std::size_t f : favs) names.push_back(beer_ids[f]);
            const bool use_max = op == "recommend-max";
            got = recommend_from_favorites(model, names, n, use_max ? Aggregate::max : Aggregate::mean);
            std::vector<RankedEntry> all;
            for (std::size_t c = 0; c < nb; ++c) {
                if (favs.count(c)) continue;
                double total = 0.0, best = -INFINITY;
                for (std::size_t f : favs) {
                    const double s = oracle::naive_dot(beers[c], beers[f]);
                    total += s;
                    best = std::max(best, s);
                }
                all.push_back({beer_ids[c], use_max ? best : total / static_cast<double>(favs.size())});
            }
            std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
                return a.score > b.score || (a.score == b.score && a.id < b.id);
            });
            all.resize(std::min(all.size(), n));
            want = all;
        } else if (op == "profile") {
            std::set<std::size_t> chosen;
            const std::size_t count = 1 + rng.below(4);
            while (chosen.size() < count) chosen.insert(rng.below(nf));
            std::vector<double> raw;
            for (std::size_t i = 0; i < count; ++i) raw.push_back(0.1 + rng.unit());
            double sum = 0.0;
            for (double w : raw) sum += w;
            std::vector<FlavorWeight> profile;
            std::vector<double> query(k, 0.0);
            std::size_t i = 0;
            for (std::size_t f : chosen) {
                const double w = raw[i++] / sum;
                profile.push_back({flavor_ids[f], w});
                for (std::size_t c = 0; c < k; ++c) query[c] += w * flavors[f][c];
            }
            got = profile_search(model, profile, n);
            want = oracle::scan_rank(beer_ids, beers, query, n);
        } else {
            const std::size_t b = rng.below(nb), minus = rng.below(nf), plus = rng.below(nf);
            std::vector<double> query = beers[b];
            for (std::size_t c = 0; c < k; ++c) query[c] = query[c] - flavors[minus][c] + flavors[plus][c];
            got = flavor_arithmetic(model, beer_ids[b], {flavor_ids[minus]}, {flavor_ids[plus]}, n);
            want = oracle::scan_rank(beer_ids, beers, query, n, {b});
        }
        ++checked[op];
        if (!same_ranking(got, want)) ++mismatched[op];
    }
    std::string detail = "200 queries over 1000 beers:";
    int bad = 0;
    for (const auto& [op, count] : checked) {
        detail += " " + op + " " + std::to_string(count - mismatched[op]) + "/" + std::to_string(count);
        bad += mismatched[op];
    }
    return {bad == 0, detail};
}

Outcome determinism() {
    const auto& ref = reference();
    const fs::path dir = scratch_dir();
    const fs::path a = dir / "first.b2v", b = dir / "second.b2v";
    save_model(ref.report.model, ref.corpus.dataset.stats, a);
    const auto again = train(generate_synthetic(SyntheticSpec{}).dataset, TrainConfig{});
    save_model(again.model, ref.corpus.dataset.stats, b);
    const std::string x = read_bytes(a), y = read_bytes(b);
    fs::remove_all(dir);
    return {!x.empty() && x == y, "two 300-epoch runs, " + std::to_string(x.size()) + " bytes each, " +
                                      (x == y ? "identical" : "different")};
}

Outcome persistence() {
    const auto& ref = reference();
    const fs::path dir = scratch_dir();
    const fs::path first = dir / "m1.b2v", second = dir / "m2.b2v";
    save_model(ref.report.model, ref.corpus.dataset.stats, first);
    const ModelBundle loaded = load_model(first);
    save_model(loaded.model, loaded.stats, second);
    const std::string bytes = read_bytes(first);
    const bool round_trip = bytes == read_bytes(second);
    fs::remove_all(dir);

    auto rejects = [](std::string blob, const std::string& needle) {
        try {
            decode_model(blob);
        } catch (const FormatError& e) {
            return std::string(e.what()).find(needle) != std::string::npos;
        } catch (...) {
        }
        return false;
    };
    std::string bad_magic = bytes;
    bad_magic.replace(0, 4, "XXXX");
    const std::size_t payload = 4 * ref.report.model.dim() * (ref.report.model.beers().size() + ref.report.model.flavors().size());
    const std::string expected = "truncated payload: expected " + std::to_string(payload) + " bytes, got " + std::to_string(payload - 4);
    const bool magic_ok = rejects(bad_magic, "bad magic");
    const bool trunc_ok = rejects(bytes.substr(0, bytes.size() - 4), expected);
    return {round_trip && magic_ok && trunc_ok, std::string("save-load-save ") + (round_trip ? "identical" : "differs") +
                                                    ", bad magic " + (magic_ok ? "rejected" : "NOT rejected") +
                                                    ", truncated " + (trunc_ok ? "rejected" : "NOT rejected")};
}

Outcome api_conformance() {
    const auto& ref = reference();
    const ModelBundle bundle = decode_model(encode_model(ref.report.model, ref.corpus.dataset.stats));
    auto service = std::make_shared<const ApiService>(bundle, ApiConfig{});
    const auto& m = service->model();
    const auto& fmt_json = service->formatter();
    const std::string beer = m.beers().at(4), other = m.beers().at(17);
    const std::string f0 = m.flavors().at(0), f1 = m.flavors().at(6);

    int checks = 0, failed = 0;
    std::vector<std::string> notes;
    auto expect = [&](bool ok, const std::string& what) {
        ++checks;
        if (!ok) {
            ++failed;
            notes.push_back(what);
        }
    };
    auto call = [&](const std::string& method, const std::string& path, const std::string& body = "",
                    std::multimap<std::string, std::string> params = {}) {
        return service->handle(method, path, params, body);
    };

    expect(call("GET", "/api/beers").body == fmt_json.beer_list().dump(), "beers");
    expect(call("GET", "/api/flavors").body == json(m.flavors().items()).dump(), "flavors");
    expect(call("GET", "/api/beers/" + beer + "/similar", "", {{"n", "5"}}).body ==
               fmt_json.beers(similar_beers(m, beer, 5), {{"type", "similar"}, {"beer", beer}, {"n", 5}}).dump(),
           "similar");
    expect(call("GET", "/api/beers/" + beer + "/flavors").body ==
               fmt_json.flavors(describe_beer(m, beer, 3), {{"type", "describe"}, {"beer", beer}, {"n", 3}}).dump(),
           "describe");

    auto same_entries = [](const std::string& body, const RankedResult& r) {
        const json parsed = json::parse(body);
        if (parsed["results"].size() != r.entries.size()) return false;
        for (std::size_t i = 0; i < r.entries.size(); ++i) {
            if (parsed["results"][i]["id"] != r.entries[i].id || parsed["results"][i]["score"].get<double>() != r.entries[i].score)
                return false;
        }
        return true;
    };
    expect(same_entries(call("POST", "/api/recommend", json{{"favorites", {beer, other}}, {"n", 7}}.dump()).body,
                        recommend_from_favorites(m, {beer, other}, 7)),
           "recommend");
    expect(same_entries(call("POST", "/api/profile",
                             json{{"flavors", {{{"tag", f0}, {"weight", 0.3}}, {{"tag", f1}, {"weight", 0.7}}}}, {"n", 6}}.dump())
                            .body,
                        profile_search(m, {{f0, 0.3}, {f1, 0.7}}, 6)),
           "profile");
    expect(same_entries(call("POST", "/api/arithmetic", json{{"base", beer}, {"minus", {f0}}, {"plus", {f1}}, {"n", 4}}.dump()).body,
                        flavor_arithmetic(m, beer, {f0}, {f1}, 4)),
           "arithmetic");
    const json projection = json::parse(call("GET", "/api/projection/flavors2d").body);
    const Matrix coords = project_flavors_2d(m);
    bool proj_ok = projection.size() == coords.rows();
    for (std::size_t i = 0; proj_ok && i < coords.rows(); ++i) {
        proj_ok = projection[i]["tag"] == m.flavors().at(i) && projection[i]["x"].get<double>() == coords(i, 0) &&
                  projection[i]["y"].get<double>() == coords(i, 1);
    }
    expect(proj_ok, "projection");

    const auto unknown = call("GET", "/api/beers/nobody/nothing/similar");
    expect(unknown.status == 404 && unknown.body.find("unknown beer") != std::string::npos, "404 unknown beer");
    expect(call("POST", "/api/arithmetic", json{{"base", beer}, {"plus", {"no-such-tag"}}}.dump()).status == 404, "404 tag");
    const auto sum = call("POST", "/api/profile",
                          json{{"flavors", {{{"tag", f0}, {"weight", 0.5}}, {{"tag", f1}, {"weight", 0.4}}}}}.dump());
    expect(sum.status == 422 && sum.body.find("0.9") != std::string::npos, "422 weight sum");
    expect(call("GET", "/api/beers/" + beer + "/similar", "", {{"n", "51"}}).status == 422, "422 n > max");
    expect(call("POST", "/api/recommend", json{{"favorites", {beer}}, {"n", 51}}.dump()).status == 422, "422 body n > max");
    expect(call("POST", "/api/recommend", "{\"favorites\": [").status == 400, "400 malformed");

    // The same requests through a real socket.
    ApiServer server(service);
    const int port = server.bind("127.0.0.1", 0);
    std::thread worker([&] { server.listen(); });
    for (int i = 0; i < 200 && !server.running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    httplib::Client client("127.0.0.1", port);
    const std::string slash = beer.find('/') == std::string::npos
                                  ? beer
                                  : beer.substr(0, beer.find('/')) + "%2F" + beer.substr(beer.find('/') + 1);
    const auto get = client.Get("/api/beers/" + slash + "/similar?n=5");
    expect(get && get->status == 200 && get->body == call("GET", "/api/beers/" + beer + "/similar", "", {{"n", "5"}}).body,
           "http similar");
    const std::string body = json{{"favorites", {beer, other}}, {"aggregate", "max"}}.dump();
    const auto post = client.Post("/api/recommend", body, "application/json");
    expect(post && post->status == 200 && post->body == call("POST", "/api/recommend", body).body, "http recommend");
    const auto missing = client.Get("/api/beers/nobody/similar");
    expect(missing && missing->status == 404, "http 404");
    const auto bad = client.Post("/api/profile", "not json", "application/json");
    expect(bad && bad->status == 400, "http 400");
    server.stop();
    worker.join();

    std::string detail = std::to_string(checks - failed) + "/" + std::to_string(checks) + " endpoint and status checks";
    for (const auto& n : notes) detail += "; failed " + n;
    return {failed == 0, detail};
}

}  // namespace

int main() {
    criterion("gradient-correctness", gradient_correctness);
    criterion("training-efficacy", training_efficacy);
    criterion("baseline-comparison", baseline_comparison);
    criterion("flavor-arithmetic", flavor_arithmetic_criterion);
    criterion("pca-oracle", pca_oracle);
    criterion("retrieval-oracle", retrieval_oracle);
    criterion("determinism", determinism);
    criterion("persistence", persistence);
    criterion("api-conformance", api_conformance);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}

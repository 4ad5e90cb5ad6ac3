#include "brewvec/server.hpp"

#include <charconv>
#include <csignal>
#include <iostream>
#include <regex>

#include "httplib.h"

#include "brewvec/errors.hpp"
#include "brewvec/pca.hpp"
#include "brewvec/retrieval.hpp"

namespace brewvec {

using nlohmann::json;

namespace {

/// Malformed request: maps to 400.
class BadRequest : public Error {
public:
    using Error::Error;
};

/// Well-formed request with an unacceptable value: maps to 422.
class Unprocessable : public Error {
public:
    using Error::Error;
};

ApiResponse reply(int status, const json& body) { return {status, body.dump()}; }

ApiResponse error_reply(int status, const std::string& message) { return reply(status, {{"error", message}}); }

template <typename T>
T required(const json& body, const char* key) {
    auto it = body.find(key);
    if (it == body.end()) throw BadRequest(std::string("missing field '") + key + "'");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw BadRequest(std::string("field '") + key + "' has the wrong type");
    }
}

template <typename T>
T optional_field(const json& body, const char* key, T fallback) {
    auto it = body.find(key);
    if (it == body.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw BadRequest(std::string("field '") + key + "' has the wrong type");
    }
}

json parse_body(const std::string& body) {
    json parsed;
    try {
        parsed = json::parse(body);
    } catch (const json::parse_error& e) {
        throw BadRequest(std::string("malformed JSON body: ") + e.what());
    }
    if (!parsed.is_object()) throw BadRequest("request body must be a JSON object");
    return parsed;
}

}  // namespace

void parse_bind(const std::string& bind, ApiConfig& config) {
    const auto colon = bind.rfind(':');
    std::string host = colon == std::string::npos ? bind : bind.substr(0, colon);
    if (colon != std::string::npos) {
        const std::string port_text = bind.substr(colon + 1);
        int port = 0;
        auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
        if (ec != std::errc() || ptr != port_text.data() + port_text.size() || port < 0 || port > 65535) {
            throw ValidationError("invalid port in bind address '" + bind + "'");
        }
        config.port = port;
    }
    if (!host.empty()) config.host = host;
}

ApiService::ApiService(ModelBundle bundle, ApiConfig config)
    : bundle_(std::move(bundle)), config_(std::move(config)), formatter_(bundle_.model, bundle_.stats) {
    if (config_.max_n == 0) throw DomainError("max_n must be positive");
    beers_body_ = formatter_.beer_list().dump();
    flavors_body_ = json(bundle_.model.flavors().items()).dump();
    if (bundle_.model.dim() >= 2 && bundle_.model.flavors().size() >= 3) {
        const Matrix coords = project_flavors_2d(bundle_.model);
        json rows = json::array();
        for (std::size_t f = 0; f < coords.rows(); ++f) {
            rows.push_back({{"tag", bundle_.model.flavors().at(f)}, {"x", coords(f, 0)}, {"y", coords(f, 1)}});
        }
        projection_body_ = rows.dump();
    }
}

std::size_t ApiService::query_n(const std::multimap<std::string, std::string>& params, std::size_t fallback) const {
    auto it = params.find("n");
    if (it == params.end() || it->second.empty()) return fallback;
    long long n = 0;
    const std::string& text = it->second;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
    if (ec != std::errc() || ptr != text.data() + text.size()) throw BadRequest("n must be an integer, got '" + text + "'");
    if (n < 1) throw Unprocessable("n must be at least 1");
    if (static_cast<unsigned long long>(n) > config_.max_n) {
        throw Unprocessable("n=" + text + " exceeds the maximum of " + std::to_string(config_.max_n));
    }
    return static_cast<std::size_t>(n);
}

std::size_t ApiService::body_n(const json& body, std::size_t fallback) const {
    auto it = body.find("n");
    if (it == body.end() || it->is_null()) return fallback;
    if (!it->is_number_integer()) throw BadRequest("field 'n' must be an integer");
    const auto n = it->get<long long>();
    if (n < 1) throw Unprocessable("n must be at least 1");
    if (static_cast<unsigned long long>(n) > config_.max_n) {
        throw Unprocessable("n=" + std::to_string(n) + " exceeds the maximum of " + std::to_string(config_.max_n));
    }
    return static_cast<std::size_t>(n);
}

ApiResponse ApiService::similar(const std::string& id, const std::multimap<std::string, std::string>& params) const {
    const std::size_t n = query_n(params, config_.default_n);
    const RankedResult result = similar_beers(model(), id, n);
    return reply(200, formatter_.beers(result, {{"type", "similar"}, {"beer", id}, {"n", n}}));
}

ApiResponse ApiService::beer_flavors(const std::string& id,
                                     const std::multimap<std::string, std::string>& params) const {
    const std::size_t n = query_n(params, 3);
    const RankedResult result = describe_beer(model(), id, n);
    return reply(200, formatter_.flavors(result, {{"type", "describe"}, {"beer", id}, {"n", n}}));
}

ApiResponse ApiService::recommend(const json& body) const {
    const auto favorites = required<std::vector<std::string>>(body, "favorites");
    const std::size_t n = body_n(body, config_.default_n);
    const auto aggregate_name = optional_field<std::string>(body, "aggregate", "mean");
    Aggregate aggregate;
    if (aggregate_name == "mean") {
        aggregate = Aggregate::mean;
    } else if (aggregate_name == "max") {
        aggregate = Aggregate::max;
    } else {
        throw Unprocessable("aggregate must be 'mean' or 'max', got '" + aggregate_name + "'");
    }
    const RankedResult result = recommend_from_favorites(model(), favorites, n, aggregate);
    return reply(200, formatter_.beers(result, {{"type", "recommend"},
                                                {"favorites", favorites},
                                                {"n", n},
                                                {"aggregate", aggregate_name}}));
}

ApiResponse ApiService::profile(const json& body) const {
    auto it = body.find("flavors");
    if (it == body.end() || !it->is_array()) throw BadRequest("field 'flavors' must be an array");
    std::vector<FlavorWeight> profile;
    json echo = json::array();
    for (const auto& item : *it) {
        if (!item.is_object()) throw BadRequest("each flavor entry must be an object {tag, weight}");
        FlavorWeight weight{required<std::string>(item, "tag"), required<double>(item, "weight")};
        echo.push_back({{"tag", weight.tag}, {"weight", weight.weight}});
        profile.push_back(std::move(weight));
    }
    const std::size_t n = body_n(body, config_.default_n);
    const RankedResult result = profile_search(model(), profile, n);
    return reply(200, formatter_.beers(result, {{"type", "profile"}, {"flavors", std::move(echo)}, {"n", n}}));
}

ApiResponse ApiService::arithmetic(const json& body) const {
    const auto base = required<std::string>(body, "base");
    const auto minus = optional_field<std::vector<std::string>>(body, "minus", {});
    const auto plus = optional_field<std::vector<std::string>>(body, "plus", {});
    const std::size_t n = body_n(body, config_.default_n);
    const RankedResult result = flavor_arithmetic(model(), base, minus, plus, n);
    return reply(200, formatter_.beers(result, {{"type", "arithmetic"},
                                                {"base", base},
                                                {"minus", minus},
                                                {"plus", plus},
                                                {"n", n}}));
}

ApiResponse ApiService::handle(const std::string& method, const std::string& path,
                               const std::multimap<std::string, std::string>& params,
                               const std::string& body) const {
    static const std::regex similar_route(R"(/api/beers/(.+)/similar)");
    static const std::regex flavors_route(R"(/api/beers/(.+)/flavors)");

    try {
        std::smatch match;
        if (method == "GET") {
            if (path == "/api/beers") return {200, beers_body_};
            if (path == "/api/flavors") return {200, flavors_body_};
            if (path == "/api/projection/flavors2d") {
                if (!projection_body_) throw Unprocessable("model too small for a 2D flavor projection");
                return {200, *projection_body_};
            }
            if (std::regex_match(path, match, similar_route)) return similar(match[1], params);
            if (std::regex_match(path, match, flavors_route)) return beer_flavors(match[1], params);
        } else if (method == "POST") {
            if (path == "/api/recommend") return recommend(parse_body(body));
            if (path == "/api/profile") return profile(parse_body(body));
            if (path == "/api/arithmetic") return arithmetic(parse_body(body));
        }
        return error_reply(404, "no route for " + method + " " + path);
    } catch (const BadRequest& e) {
        return error_reply(400, e.what());
    } catch (const NotFoundError& e) {
        return error_reply(404, e.what());
    } catch (const ValidationError& e) {
        return error_reply(422, e.what());
    } catch (const Unprocessable& e) {
        return error_reply(422, e.what());
    } catch (const DomainError& e) {
        return error_reply(422, e.what());
    } catch (const std::exception& e) {
        return error_reply(500, e.what());
    }
}

struct ApiServer::Impl {
    std::shared_ptr<const ApiService> service;
    httplib::Server http;
};

ApiServer::ApiServer(std::shared_ptr<const ApiService> service) : impl_(std::make_unique<Impl>()) {
    impl_->service = std::move(service);
    const ApiService* api = impl_->service.get();
    const std::string origin = api->config().cors_origin;

    auto forward = [api, origin](const httplib::Request& req, httplib::Response& res) {
        std::multimap<std::string, std::string> params(req.params.begin(), req.params.end());
        const ApiResponse out = api->handle(req.method, req.path, params, req.body);
        res.status = out.status;
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_content(out.body, "application/json");
    };
    impl_->http.Get(".*", forward);
    impl_->http.Post(".*", forward);
    impl_->http.Options(".*", [origin](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = impl_->http.bind_to_any_port(host);
        if (bound < 0) throw IoError("cannot bind " + host + " on any port");
        return bound;
    }
    if (!impl_->http.bind_to_port(host, port)) throw IoError("cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void ApiServer::listen() { impl_->http.listen_after_bind(); }

void ApiServer::stop() {
    if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

bool ApiServer::running() const { return impl_->http.is_running(); }

namespace {
ApiServer* g_active_server = nullptr;
extern "C" void stop_on_signal(int) {
    if (g_active_server) g_active_server->stop();
}
}  // namespace

void serve(const ApiConfig& config) {
    auto service = std::make_shared<const ApiService>(load_model(config.model_path), config);
    ApiServer server(service);
    const int port = server.bind(config.host, config.port);
    std::cerr << "serving " << service->model().beers().size() << " beers on http://" << config.host << ':' << port
              << '\n';
    g_active_server = &server;
    std::signal(SIGINT, stop_on_signal);
    std::signal(SIGTERM, stop_on_signal);
    server.listen();
    g_active_server = nullptr;
}

}  // namespace brewvec

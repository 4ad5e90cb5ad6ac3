#ifndef BREWVEC_SERVER_HPP
#define BREWVEC_SERVER_HPP

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "json.hpp"

#include "brewvec/model_store.hpp"
#include "brewvec/result_json.hpp"

namespace brewvec {

struct ApiConfig {
    std::string host = "127.0.0.1";
    int port = 8642;
    std::filesystem::path model_path;
    std::string cors_origin = "*";
    std::size_t max_n = 50;
    std::size_t default_n = 10;
};

/// Parses "host:port", ":port" or "host". Throws ValidationError.
void parse_bind(const std::string& bind, ApiConfig& config);

struct ApiResponse {
    int status = 200;
    std::string body;  ///< JSON
};

/**
 * @brief Transport-free request handling over one immutable model.
 *
 * Every public method is const and safe to call from concurrent threads.
 *
 *   GET  /api/beers
 *   GET  /api/flavors
 *   GET  /api/beers/{id}/similar?n=
 *   GET  /api/beers/{id}/flavors?n=        (default n=3)
 *   POST /api/recommend   {favorites, n, aggregate}
 *   POST /api/profile     {flavors:[{tag, weight}], n}
 *   POST /api/arithmetic  {base, minus, plus, n}
 *   GET  /api/projection/flavors2d
 */
class ApiService {
public:
    ApiService(ModelBundle bundle, ApiConfig config);
    ApiService(const ApiService&) = delete;
    ApiService& operator=(const ApiService&) = delete;

    /// @p path is percent-decoded; @p params holds decoded query parameters.
    ApiResponse handle(const std::string& method, const std::string& path,
                       const std::multimap<std::string, std::string>& params, const std::string& body) const;

    const EmbeddingModel& model() const noexcept { return bundle_.model; }
    const BeerStats& stats() const noexcept { return bundle_.stats; }
    const ResultFormatter& formatter() const noexcept { return formatter_; }
    const ApiConfig& config() const noexcept { return config_; }

private:
    ApiResponse similar(const std::string& id, const std::multimap<std::string, std::string>& params) const;
    ApiResponse beer_flavors(const std::string& id, const std::multimap<std::string, std::string>& params) const;
    ApiResponse recommend(const nlohmann::json& body) const;
    ApiResponse profile(const nlohmann::json& body) const;
    ApiResponse arithmetic(const nlohmann::json& body) const;

    std::size_t query_n(const std::multimap<std::string, std::string>& params, std::size_t fallback) const;
    std::size_t body_n(const nlohmann::json& body, std::size_t fallback) const;

    ModelBundle bundle_;
    ApiConfig config_;
    ResultFormatter formatter_;
    std::optional<std::string> projection_body_;
    std::string beers_body_;
    std::string flavors_body_;
};

/// HTTP front end; owns a listening socket and worker threads.
class ApiServer {
public:
    ApiServer(std::shared_ptr<const ApiService> service);
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    /// Binds host:port; port 0 picks a free port. Returns the bound port. Throws IoError.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void listen();
    void stop();
    bool running() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Loads config.model_path and serves until the process is interrupted.
void serve(const ApiConfig& config);

}  // namespace brewvec

#endif  // BREWVEC_SERVER_HPP

// Reference implementations used only by tests. They deliberately take
// different routes from the library: no max-subtraction, full sorts, cyclic
// Jacobi rotations instead of tridiagonal QL.
#ifndef BREWVEC_TESTS_ORACLES_HPP
#define BREWVEC_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "brewvec/model.hpp"
#include "brewvec/random.hpp"
#include "brewvec/retrieval.hpp"

namespace oracle {

using Rows = std::vector<std::vector<double>>;

inline double naive_dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Rows to_rows(const brewvec::Matrix& m) {
    Rows rows(m.rows(), std::vector<double>(m.cols()));
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) rows[r][c] = m(r, c);
    }
    return rows;
}

/// -mean log p(f|b) with the textbook softmax (no stabilisation).
inline double naive_nll(const Rows& beers, const Rows& flavors, const std::vector<brewvec::Pair>& pairs) {
    double total = 0.0;
    for (const auto& p : pairs) {
        double denom = 0.0;
        for (const auto& f : flavors) denom += std::exp(naive_dot(beers[p.beer], f));
        total += -std::log(std::exp(naive_dot(beers[p.beer], flavors[p.flavor])) / denom);
    }
    return total / static_cast<double>(pairs.size());
}

/// |a-b| scaled by the larger magnitude, floored at 1e-8 so exact zeros compare absolutely.
inline double relative_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

/// Central differences of naive_nll over every coordinate of B then F.
inline std::pair<Rows, Rows> finite_difference_gradient(Rows beers, Rows flavors,
                                                        const std::vector<brewvec::Pair>& pairs, double h) {
    Rows gb = beers, gf = flavors;
    for (std::size_t r = 0; r < beers.size(); ++r) {
        for (std::size_t c = 0; c < beers[r].size(); ++c) {
            const double saved = beers[r][c];
            beers[r][c] = saved + h;
            const double up = naive_nll(beers, flavors, pairs);
            beers[r][c] = saved - h;
            const double down = naive_nll(beers, flavors, pairs);
            beers[r][c] = saved;
            gb[r][c] = (up - down) / (2 * h);
        }
    }
    for (std::size_t r = 0; r < flavors.size(); ++r) {
        for (std::size_t c = 0; c < flavors[r].size(); ++c) {
            const double saved = flavors[r][c];
            flavors[r][c] = saved + h;
            const double up = naive_nll(beers, flavors, pairs);
            flavors[r][c] = saved - h;
            const double down = naive_nll(beers, flavors, pairs);
            flavors[r][c] = saved;
            gf[r][c] = (up - down) / (2 * h);
        }
    }
    return {gb, gf};
}

struct Eigen {
    std::vector<double> values;  // descending
    Rows vectors;                // vectors[j] is the j-th eigenvector
};

/// Cyclic Jacobi rotations until the off-diagonal mass vanishes.
inline Eigen jacobi_eigen(Rows a) {
    const std::size_t n = a.size();
    Rows v(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
        }
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
    Eigen out;
    for (std::size_t j : order) {
        out.values.push_back(a[j][j]);
        std::vector<double> vec(n);
        for (std::size_t k = 0; k < n; ++k) vec[k] = v[k][j];
        out.vectors.push_back(vec);
    }
    return out;
}

/// Sample covariance with divisor n-1, computed from the definition.
inline Rows covariance(const Rows& data) {
    const std::size_t n = data.size(), d = data[0].size();
    std::vector<double> mean(d, 0.0);
    for (const auto& row : data) {
        for (std::size_t j = 0; j < d; ++j) mean[j] += row[j] / static_cast<double>(n);
    }
    Rows cov(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            for (const auto& row : data) cov[i][j] += (row[i] - mean[i]) * (row[j] - mean[j]);
            cov[i][j] /= static_cast<double>(n - 1);
        }
    }
    return cov;
}

/// Score every candidate, sort the whole list, keep n.
inline std::vector<brewvec::RankedEntry> scan_rank(const std::vector<std::string>& ids, const Rows& vectors,
                                                   const std::vector<double>& query, std::size_t n,
                                                   const std::vector<std::size_t>& excluded = {}) {
    std::vector<brewvec::RankedEntry> all;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (std::find(excluded.begin(), excluded.end(), i) != excluded.end()) continue;
        all.push_back({ids[i], naive_dot(vectors[i], query)});
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.score > b.score || (a.score == b.score && a.id < b.id);
    });
    if (all.size() > n) all.resize(n);
    return all;
}

inline brewvec::Matrix random_matrix(brewvec::Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
    brewvec::Matrix m(rows, cols);
    for (double& v : m.data()) v = scale * (2.0 * rng.unit() - 1.0);
    return m;
}

inline std::vector<std::string> numbered(const std::string& prefix, std::size_t count) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < count; ++i) {
        std::string digits = std::to_string(i);
        ids.push_back(prefix + std::string(4 - std::min<std::size_t>(4, digits.size()), '0') + digits);
    }
    return ids;
}

inline brewvec::EmbeddingModel random_model(brewvec::Rng& rng, std::size_t beers, std::size_t flavors, std::size_t k,
                                            double scale = 1.0) {
    return brewvec::EmbeddingModel(brewvec::BeerVocab(numbered("brewery/beer", beers)),
                                   brewvec::FlavorVocab(numbered("flavor", flavors)),
                                   random_matrix(rng, beers, k, scale), random_matrix(rng, flavors, k, scale));
}

}  // namespace oracle

#endif  // BREWVEC_TESTS_ORACLES_HPP

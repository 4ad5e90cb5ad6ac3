#include "brewvec/pca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "brewvec/errors.hpp"

namespace brewvec {

namespace {

constexpr int kMaxSweepsPerEigenvalue = 64;

// Householder reduction of v (overwritten with the accumulated transform)
// to tridiagonal form: diagonal in d, sub-diagonal in e[1..n).
void tridiagonalize(Matrix& v, std::vector<double>& d, std::vector<double>& e) {
    const int n = static_cast<int>(v.rows());
    for (int j = 0; j < n; ++j) d[j] = v(n - 1, j);

    for (int i = n - 1; i > 0; --i) {
        double scale = 0.0;
        double h = 0.0;
        for (int k = 0; k < i; ++k) scale += std::abs(d[k]);
        if (scale == 0.0) {
            e[i] = d[i - 1];
            for (int j = 0; j < i; ++j) {
                d[j] = v(i - 1, j);
                v(i, j) = 0.0;
                v(j, i) = 0.0;
            }
        } else {
            for (int k = 0; k < i; ++k) {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            double f = d[i - 1];
            double g = std::sqrt(h);
            if (f > 0) g = -g;
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for (int j = 0; j < i; ++j) e[j] = 0.0;

            for (int j = 0; j < i; ++j) {
                f = d[j];
                v(j, i) = f;
                g = e[j] + v(j, j) * f;
                for (int k = j + 1; k <= i - 1; ++k) {
                    g += v(k, j) * d[k];
                    e[k] += v(k, j) * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for (int j = 0; j < i; ++j) {
                e[j] /= h;
                f += e[j] * d[j];
            }
            const double hh = f / (h + h);
            for (int j = 0; j < i; ++j) e[j] -= hh * d[j];
            for (int j = 0; j < i; ++j) {
                f = d[j];
                g = e[j];
                for (int k = j; k <= i - 1; ++k) v(k, j) -= (f * e[k] + g * d[k]);
                d[j] = v(i - 1, j);
                v(i, j) = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate the transformations.
    for (int i = 0; i < n - 1; ++i) {
        v(n - 1, i) = v(i, i);
        v(i, i) = 1.0;
        const double h = d[i + 1];
        if (h != 0.0) {
            for (int k = 0; k <= i; ++k) d[k] = v(k, i + 1) / h;
            for (int j = 0; j <= i; ++j) {
                double g = 0.0;
                for (int k = 0; k <= i; ++k) g += v(k, i + 1) * v(k, j);
                for (int k = 0; k <= i; ++k) v(k, j) -= g * d[k];
            }
        }
        for (int k = 0; k <= i; ++k) v(k, i + 1) = 0.0;
    }
    for (int j = 0; j < n; ++j) {
        d[j] = v(n - 1, j);
        v(n - 1, j) = 0.0;
    }
    v(n - 1, n - 1) = 1.0;
    e[0] = 0.0;
}

// Implicit QL with Wilkinson-style shifts on the tridiagonal (d, e).
void tridiagonal_ql(Matrix& v, std::vector<double>& d, std::vector<double>& e) {
    const int n = static_cast<int>(v.rows());
    for (int i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;

    double f = 0.0;
    double tst1 = 0.0;
    const double eps = std::numeric_limits<double>::epsilon();
    for (int l = 0; l < n; ++l) {
        tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
        int m = l;
        while (m < n) {
            if (std::abs(e[m]) <= eps * tst1) break;
            ++m;
        }
        if (m > l) {
            int sweeps = 0;
            do {
                if (++sweeps > kMaxSweepsPerEigenvalue) throw DomainError("symmetric eigensolver did not converge");
                double g = d[l];
                double p = (d[l + 1] - g) / (2.0 * e[l]);
                double r = std::hypot(p, 1.0);
                if (p < 0) r = -r;
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                const double dl1 = d[l + 1];
                double h = g - d[l];
                for (int i = l + 2; i < n; ++i) d[i] -= h;
                f += h;

                p = d[m];
                double c = 1.0, c2 = 1.0, c3 = 1.0;
                const double el1 = e[l + 1];
                double s = 0.0, s2 = 0.0;
                for (int i = m - 1; i >= l; --i) {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = std::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for (int k = 0; k < n; ++k) {
                        h = v(k, i + 1);
                        v(k, i + 1) = s * v(k, i) + c * h;
                        v(k, i) = c * v(k, i) - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
            } while (std::abs(e[l]) > eps * tst1);
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

}  // namespace

SymmetricEigen symmetric_eigen(const Matrix& symmetric) {
    const std::size_t n = symmetric.rows();
    if (n == 0 || symmetric.cols() != n) throw DomainError("symmetric_eigen needs a non-empty square matrix");
    if (!symmetric.all_finite()) throw DomainError("symmetric_eigen input has non-finite entries");

    Matrix v = symmetric;
    std::vector<double> d(n), e(n);
    tridiagonalize(v, d, e);
    tridiagonal_ql(v, d, e);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });

    SymmetricEigen out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = d[order[j]];
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, j) = v(r, order[j]);
    }
    return out;
}

PcaModel fit_pca(const Matrix& data, std::size_t components) {
    const std::size_t n = data.rows();
    const std::size_t d = data.cols();
    if (n < 2) throw DomainError("PCA needs at least 2 samples, got " + std::to_string(n));
    if (components < 1 || components > std::min(n - 1, d)) {
        throw DomainError("PCA component count " + std::to_string(components) + " outside [1, " +
                          std::to_string(std::min(n - 1, d)) + "]");
    }
    if (!data.all_finite()) throw DomainError("PCA input has non-finite entries");

    PcaModel model;
    model.means.assign(d, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) model.means[c] += data(r, c);
    }
    for (double& m : model.means) m /= static_cast<double>(n);

    Matrix covariance(d, d);
    std::vector<double> centered(d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) centered[c] = data(r, c) - model.means[c];
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j <= i; ++j) covariance(i, j) += centered[i] * centered[j];
        }
    }
    const double divisor = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            covariance(i, j) /= divisor;
            covariance(j, i) = covariance(i, j);
        }
    }

    model.components = Matrix(components, d);
    model.explained_variance.assign(components, 0.0);

    const auto cov = covariance.data();
    if (std::all_of(cov.begin(), cov.end(), [](double x) { return x == 0.0; })) {
        for (std::size_t c = 0; c < components; ++c) model.components(c, c) = 1.0;
        return model;
    }

    const SymmetricEigen eigen = symmetric_eigen(covariance);
    for (std::size_t c = 0; c < components; ++c) {
        // Rounding can leave tiny negative values on a rank-deficient covariance.
        model.explained_variance[c] = std::max(eigen.values[c], 0.0);
        std::size_t peak = 0;
        for (std::size_t r = 1; r < d; ++r) {
            if (std::abs(eigen.vectors(r, c)) > std::abs(eigen.vectors(peak, c))) peak = r;
        }
        const double sign = eigen.vectors(peak, c) < 0.0 ? -1.0 : 1.0;
        for (std::size_t r = 0; r < d; ++r) model.components(c, r) = sign * eigen.vectors(r, c);
    }
    return model;
}

Matrix transform(const PcaModel& model, const Matrix& data) {
    const std::size_t d = model.means.size();
    if (data.cols() != d) {
        throw DomainError("PCA transform expects " + std::to_string(d) + " columns, got " +
                          std::to_string(data.cols()));
    }
    const std::size_t c = model.components.rows();
    Matrix scores(data.rows(), c);
    std::vector<double> centered(d);
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t j = 0; j < d; ++j) centered[j] = data(r, j) - model.means[j];
        for (std::size_t k = 0; k < c; ++k) scores(r, k) = dot(centered, model.components.row(k));
    }
    return scores;
}

Matrix pca_beer_vectors(const CountMatrix& counts, std::size_t components) {
    const Matrix data = counts.to_matrix();
    return transform(fit_pca(data, components), data);
}

Matrix project_flavors_2d(const EmbeddingModel& model) {
    if (model.dim() < 2) throw DomainError("2D projection needs embedding dimension >= 2");
    const Matrix& flavors = model.flavor_matrix();
    return transform(fit_pca(flavors, 2), flavors);
}

}  // namespace brewvec

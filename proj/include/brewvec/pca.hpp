#ifndef BREWVEC_PCA_HPP
#define BREWVEC_PCA_HPP

#include <cstddef>
#include <vector>

#include "brewvec/ingest.hpp"
#include "brewvec/matrix.hpp"
#include "brewvec/model.hpp"

namespace brewvec {

struct SymmetricEigen {
    std::vector<double> values;  ///< descending
    Matrix vectors;              ///< column j pairs with values[j]
};

/**
 * @brief Eigendecomposition of a dense symmetric matrix.
 *
 * Householder reduction to tridiagonal form followed by implicit QL
 * iterations. Only the lower triangle is trusted to be symmetric with the
 * upper one; callers pass an exactly symmetric matrix.
 */
SymmetricEigen symmetric_eigen(const Matrix& symmetric);

struct PcaModel {
    std::vector<double> means;
    Matrix components;                      ///< c x d, orthonormal rows
    std::vector<double> explained_variance; ///< non-increasing
};

/**
 * Top-@p components eigenpairs of the sample covariance (divisor n-1) of the
 * column-centered data. Each component is flipped so that its largest
 * magnitude entry is positive. Zero-variance input yields canonical basis
 * vectors with zero variance.
 */
PcaModel fit_pca(const Matrix& data, std::size_t components);

/// (data - means) * components^T
Matrix transform(const PcaModel& model, const Matrix& data);

/// Beers as samples, flavor counts as features.
Matrix pca_beer_vectors(const CountMatrix& counts, std::size_t components = 5);

/// Fig-style 2D map of the learned flavor matrix.
Matrix project_flavors_2d(const EmbeddingModel& model);

}  // namespace brewvec

#endif  // BREWVEC_PCA_HPP

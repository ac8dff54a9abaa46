#pragma once

#include "vface/raster.hpp"

namespace vface {

// Row-major flatten of the pixel grid.
Eigen::VectorXd vectorize(const Image& image);

// Orthonormal 2-D DCT-II and its inverse; idct2(dct2(x)) == x to machine
// precision and energy is preserved (Parseval).
Image dct2(const Image& block);
Image idct2(const Image& coefficients);

// dct2 then the top-left keep x keep low-frequency block, row-major; dim = keep^2.
Eigen::VectorXd dct_compress(const Image& image, int keep);

// Principal components of centered training vectors. basis columns are
// orthonormal; eigenvalues (of the 1/(count-1) covariance) are sorted
// non-increasing with tiny negatives clamped to zero. Each basis vector is
// sign-fixed so its first nonzero entry is positive.
struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd basis;        // dim x m
    Eigen::VectorXd eigenvalues;  // m
    int m = 0;
};

enum class PcaSolver {
    automatic,   // gram when count < dim, covariance otherwise
    gram,        // eigendecompose the count x count inner-product matrix
    covariance,  // eigendecompose the dim x dim covariance directly
};

// vectors are the columns of data (dim x count); count >= 2 and
// m <= min(count-1, dim).
PcaModel pca_fit(const Eigen::MatrixXd& data, int m, PcaSolver solver = PcaSolver::automatic);

// Coefficients of (v - mean) on the m basis vectors.
Eigen::VectorXd pca_project(const PcaModel& model, const Eigen::VectorXd& v);

}  // namespace vface

#include "vface/features.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace vface {
namespace {

// N x N orthonormal DCT-II matrix: T(j,i) = c_j cos(pi (2i+1) j / 2N).
Eigen::MatrixXd dct_matrix(long n) {
    Eigen::MatrixXd t(n, n);
    const double c0 = std::sqrt(1.0 / double(n));
    const double cj = std::sqrt(2.0 / double(n));
    for (long j = 0; j < n; ++j)
        for (long i = 0; i < n; ++i)
            t(j, i) = (j == 0 ? c0 : cj) * std::cos(M_PI * (2.0 * i + 1.0) * j / (2.0 * n));
    return t;
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    for (long i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > 1e-9) {
            if (v[i] < 0.0) v = -v;
            return;
        }
    }
}

}  // namespace

Eigen::VectorXd vectorize(const Image& image) {
    return Eigen::Map<const Eigen::VectorXd>(image.data(), image.size());
}

Image dct2(const Image& block) {
    const Eigen::MatrixXd tr = dct_matrix(block.rows());
    const Eigen::MatrixXd tc = dct_matrix(block.cols());
    return (tr * block.matrix() * tc.transpose()).array();
}

Image idct2(const Image& coefficients) {
    const Eigen::MatrixXd tr = dct_matrix(coefficients.rows());
    const Eigen::MatrixXd tc = dct_matrix(coefficients.cols());
    return (tr.transpose() * coefficients.matrix() * tc).array();
}

Eigen::VectorXd dct_compress(const Image& image, int keep) {
    if (keep < 1 || keep > image.cols() || keep > image.rows())
        throw std::invalid_argument("dct_compress: keep out of range");
    const Image coef = dct2(image);
    Eigen::VectorXd out(static_cast<long>(keep) * keep);
    for (int j = 0; j < keep; ++j)
        for (int i = 0; i < keep; ++i)
            out[static_cast<long>(j) * keep + i] = coef(j, i);
    return out;
}

PcaModel pca_fit(const Eigen::MatrixXd& data, int m, PcaSolver solver) {
    const long dim = data.rows(), count = data.cols();
    if (count < 2) throw std::invalid_argument("pca_fit: need at least 2 vectors");
    if (m < 1 || m > std::min(count - 1, dim))
        throw std::invalid_argument("pca_fit: m must be in [1, min(count-1, dim)]");
    if (solver == PcaSolver::automatic)
        solver = count < dim ? PcaSolver::gram : PcaSolver::covariance;

    PcaModel model;
    model.m = m;
    model.mean = data.rowwise().mean();
    const Eigen::MatrixXd centered = data.colwise() - model.mean;
    model.basis.resize(dim, m);
    model.eigenvalues.resize(m);

    if (solver == PcaSolver::covariance) {
        const Eigen::MatrixXd cov =
            centered * centered.transpose() / double(count - 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
        if (eig.info() != Eigen::Success)
            throw std::runtime_error("pca_fit: eigendecomposition failed");
        for (int i = 0; i < m; ++i) {  // solver sorts ascending
            model.eigenvalues[i] = std::max(eig.eigenvalues()[dim - 1 - i], 0.0);
            model.basis.col(i) = eig.eigenvectors().col(dim - 1 - i);
        }
    } else {
        const Eigen::MatrixXd gram = centered.transpose() * centered;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
        if (eig.info() != Eigen::Success)
            throw std::runtime_error("pca_fit: eigendecomposition failed");
        const double scale = eig.eigenvalues().cwiseAbs().maxCoeff();
        int filled = 0;
        for (int i = 0; i < m; ++i) {
            const double lambda = eig.eigenvalues()[count - 1 - i];
            model.eigenvalues[i] = std::max(lambda / double(count - 1), 0.0);
            const Eigen::VectorXd mapped = centered * eig.eigenvectors().col(count - 1 - i);
            const double norm = mapped.norm();
            if (norm > 1e-12 * std::max(1.0, std::sqrt(scale))) {
                model.basis.col(i) = mapped / norm;
                ++filled;
            } else {
                model.basis.col(i).setZero();  // degenerate direction, completed below
            }
        }
        // Rank-deficient data (duplicated vectors): complete the basis with
        // canonical directions orthogonalized against what was found.
        for (int i = filled; i < m; ++i) {
            if (model.basis.col(i).norm() > 0.5) continue;
            for (long e = 0; e < dim; ++e) {
                Eigen::VectorXd cand = Eigen::VectorXd::Unit(dim, e);
                for (int j = 0; j < m; ++j)
                    if (j != i && model.basis.col(j).norm() > 0.5)
                        cand -= model.basis.col(j).dot(cand) * model.basis.col(j);
                if (cand.norm() > 1e-6) {
                    model.basis.col(i) = cand / cand.norm();
                    break;
                }
            }
        }
    }
    for (int i = 0; i < m; ++i) fix_sign(model.basis.col(i));
    return model;
}

Eigen::VectorXd pca_project(const PcaModel& model, const Eigen::VectorXd& v) {
    if (v.size() != model.mean.size())
        throw std::invalid_argument("pca_project: dimension mismatch");
    return model.basis.transpose() * (v - model.mean);
}

}  // namespace vface

#include "stylearena/pca.hpp"

#include <string>

#include "stylearena/errors.hpp"

namespace stylearena {

PcaModel fit_pca(const RowMatrix& x, std::size_t k) {
    const auto dim = static_cast<std::size_t>(x.cols());
    if (k == 0 || k > dim) {
        throw ValidationError("pca: k=" + std::to_string(k) + " must be in [1, " + std::to_string(dim) + "]");
    }
    if (x.rows() < 2) {
        throw ValidationError("pca: need at least 2 rows");
    }
    PcaModel model;
    model.mean = x.colwise().mean().transpose();
    const Eigen::MatrixXd centered = x.rowwise() - model.mean.transpose();
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(x.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw ConvergenceError("pca: eigendecomposition failed");
    }
    const auto kk = static_cast<Eigen::Index>(k);
    model.components.resize(x.cols(), kk);
    model.eigenvalues.resize(kk);
    for (Eigen::Index j = 0; j < kk; ++j) {
        const Eigen::Index src = x.cols() - 1 - j;  // eigenvalues come ascending
        Eigen::VectorXd v = solver.eigenvectors().col(src);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v[arg] < 0.0) {
            v = -v;
        }
        model.components.col(j) = v;
        model.eigenvalues[j] = solver.eigenvalues()[src];
    }
    return model;
}

RowMatrix PcaModel::transform(const RowMatrix& x) const {
    if (x.cols() != mean.size()) {
        throw ValidationError("pca: dimension mismatch");
    }
    return (x.rowwise() - mean.transpose()) * components;
}

}  // namespace stylearena

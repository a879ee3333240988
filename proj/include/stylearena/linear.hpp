#pragma once

#include <array>
#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "stylearena/report.hpp"

namespace stylearena {

/// Feature matrix, one row per sample.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// margin(x) = w.x + b. Labels are 0 (human) and 1 (AI); a positive margin
/// means "AI".
struct LinearModel {
    Eigen::VectorXd weights;
    double bias = 0.0;
    double c = 1.0;
    std::array<double, 2> class_weights{1.0, 1.0};

    double margin(std::span<const double> x) const;
    double margin(const Eigen::Ref<const Eigen::VectorXd>& x) const { return weights.dot(x) + bias; }
    Eigen::VectorXd margins(const RowMatrix& x) const;

    Json to_json() const;
    static LinearModel from_json(const Json& j);
};

/// wc(c) = n / (2 n_c); both classes must be present.
std::array<double, 2> balanced_class_weights(std::span<const int> labels);

struct SvmOptions {
    double c = 1.0;
    bool balanced = true;
    double tol = 1e-6;  // max projected-gradient violation over an epoch
    std::size_t max_epochs = 10000;
    double bias_scale = 1.0;  // constant appended to every x; 0 disables the bias
};

/// L1-loss linear SVM by dual coordinate descent in fixed cyclic order.
/// Minimises 0.5 (|w|^2 + (b/s)^2) + C sum_i wc(y_i) hinge(y_i, w.x_i + b)
/// with s = bias_scale, i.e. the bias is regularised through the augmented
/// feature. Throws ValidationError on single-class input and
/// ConvergenceError when max_epochs is hit.
LinearModel train_linear_svm(const RowMatrix& x, std::span<const int> labels, const SvmOptions& options = {});

/// The primal objective above for an arbitrary (w, b).
double svm_primal_objective(const RowMatrix& x, std::span<const int> labels, const Eigen::VectorXd& w, double b,
                            double c, const std::array<double, 2>& class_weights, double bias_scale = 1.0);

struct LogisticOptions {
    double c = 1e-3;
    bool balanced = true;
    double grad_tol = 1e-8;
    std::size_t max_iter = 100;
    double bias_scale = 1.0;
};

/// 0.5 (|w|^2 + (b/s)^2) + C sum_i wc(y_i) log(1 + exp(-y_i (w.x_i + b))).
/// `theta` is (w, b/s), length dim + 1.
double logistic_objective(const RowMatrix& x, std::span<const int> labels, const Eigen::VectorXd& theta, double c,
                          const std::array<double, 2>& class_weights, double bias_scale = 1.0);
Eigen::VectorXd logistic_gradient(const RowMatrix& x, std::span<const int> labels, const Eigen::VectorXd& theta,
                                  double c, const std::array<double, 2>& class_weights, double bias_scale = 1.0);

/// Damped Newton on the objective above until the gradient norm drops below
/// grad_tol. Throws ConvergenceError otherwise.
LinearModel train_logistic(const RowMatrix& x, std::span<const int> labels, const LogisticOptions& options = {});

}  // namespace stylearena

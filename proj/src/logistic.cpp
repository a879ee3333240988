#include <cmath>
#include <string>

#include "stylearena/errors.hpp"
#include "stylearena/linear.hpp"

namespace stylearena {

namespace {

double log1p_exp(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) {
    if (t >= 0.0) {
        return 1.0 / (1.0 + std::exp(-t));
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

struct Problem {
    const RowMatrix& x;
    std::span<const int> labels;
    double c;
    std::array<double, 2> cw;
    double s;

    double y(Eigen::Index i) const { return labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0; }
    double weight(Eigen::Index i) const { return cw[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])]; }
    double margin(Eigen::Index i, const Eigen::VectorXd& theta) const {
        return x.row(i).dot(theta.head(x.cols())) + theta[x.cols()] * s;
    }
};

void check_shapes(const RowMatrix& x, std::span<const int> labels, const Eigen::VectorXd& theta) {
    if (labels.size() != static_cast<std::size_t>(x.rows()) || theta.size() != x.cols() + 1) {
        throw ValidationError("logistic: shape mismatch");
    }
}

}  // namespace

double logistic_objective(const RowMatrix& x, std::span<const int> labels, const Eigen::VectorXd& theta, double c,
                          const std::array<double, 2>& class_weights, double bias_scale) {
    check_shapes(x, labels, theta);
    const Problem p{x, labels, c, class_weights, bias_scale};
    double loss = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        loss += p.weight(i) * log1p_exp(-p.y(i) * p.margin(i, theta));
    }
    return 0.5 * theta.squaredNorm() + c * loss;
}

Eigen::VectorXd logistic_gradient(const RowMatrix& x, std::span<const int> labels, const Eigen::VectorXd& theta,
                                  double c, const std::array<double, 2>& class_weights, double bias_scale) {
    check_shapes(x, labels, theta);
    const Problem p{x, labels, c, class_weights, bias_scale};
    Eigen::VectorXd g = theta;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double coef = -c * p.weight(i) * p.y(i) * sigmoid(-p.y(i) * p.margin(i, theta));
        g.head(x.cols()).noalias() += coef * x.row(i).transpose();
        g[x.cols()] += coef * bias_scale;
    }
    return g;
}

LinearModel train_logistic(const RowMatrix& x, std::span<const int> labels, const LogisticOptions& options) {
    if (labels.size() != static_cast<std::size_t>(x.rows())) {
        throw ValidationError("train_logistic: label count does not match rows");
    }
    if (!(options.c > 0.0)) {
        throw ValidationError("train_logistic: C must be positive");
    }
    const auto bw = balanced_class_weights(labels);
    const std::array<double, 2> cw = options.balanced ? bw : std::array<double, 2>{1.0, 1.0};
    const Problem p{x, labels, options.c, cw, options.bias_scale};
    const Eigen::Index d = x.cols();

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
    double f = logistic_objective(x, labels, theta, options.c, cw, options.bias_scale);
    double gnorm = 0.0;
    for (std::size_t iter = 0; iter <= options.max_iter; ++iter) {
        const Eigen::VectorXd g = logistic_gradient(x, labels, theta, options.c, cw, options.bias_scale);
        gnorm = g.norm();
        if (gnorm < options.grad_tol) {
            LinearModel m;
            m.weights = theta.head(d);
            m.bias = theta[d] * options.bias_scale;
            m.c = options.c;
            m.class_weights = cw;
            return m;
        }
        if (iter == options.max_iter) {
            break;
        }
        Eigen::MatrixXd h = Eigen::MatrixXd::Identity(d + 1, d + 1);
        RowMatrix xa(x.rows(), d + 1);
        xa.leftCols(d) = x;
        xa.col(d).setConstant(options.bias_scale);
        Eigen::VectorXd curv(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const double sg = sigmoid(p.margin(i, theta));
            curv[i] = options.c * p.weight(i) * sg * (1.0 - sg);
        }
        h.noalias() += xa.transpose() * curv.asDiagonal() * xa;
        const Eigen::VectorXd step = h.ldlt().solve(-g);

        double t = 1.0;
        double f_new = f;
        Eigen::VectorXd candidate;
        for (int ls = 0; ls < 60; ++ls) {
            candidate = theta + t * step;
            f_new = logistic_objective(x, labels, candidate, options.c, cw, options.bias_scale);
            if (f_new <= f + 1e-4 * t * g.dot(step)) {
                break;
            }
            t *= 0.5;
        }
        if (!(f_new <= f)) {
            break;
        }
        theta = candidate;
        f = f_new;
    }
    throw ConvergenceError("L2 logistic regression did not reach gradient norm " + std::to_string(options.grad_tol) +
                           " (last " + std::to_string(gnorm) + ")");
}

}  // namespace stylearena

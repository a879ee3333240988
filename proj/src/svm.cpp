#include <algorithm>
#include <cmath>
#include <string>

#include "stylearena/errors.hpp"
#include "stylearena/linear.hpp"

namespace stylearena {

double LinearModel::margin(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(weights.size())) {
        throw ValidationError("margin: expected dim " + std::to_string(weights.size()) + ", got " +
                              std::to_string(x.size()));
    }
    return weights.dot(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()))) + bias;
}

Eigen::VectorXd LinearModel::margins(const RowMatrix& x) const {
    if (x.cols() != weights.size()) {
        throw ValidationError("margins: dimension mismatch");
    }
    Eigen::VectorXd m = x * weights;
    m.array() += bias;
    return m;
}

Json LinearModel::to_json() const {
    Json j;
    j["dim"] = weights.size();
    j["weights"] = std::vector<double>(weights.data(), weights.data() + weights.size());
    j["bias"] = bias;
    j["C"] = c;
    j["class_weights"] = {class_weights[0], class_weights[1]};
    return j;
}

LinearModel LinearModel::from_json(const Json& j) {
    LinearModel m;
    try {
        const auto w = j.at("weights").get<std::vector<double>>();
        if (j.at("dim").get<std::size_t>() != w.size()) {
            throw ValidationError("model: dim does not match weights");
        }
        m.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
        m.bias = j.at("bias").get<double>();
        m.c = j.at("C").get<double>();
        const auto cw = j.at("class_weights").get<std::vector<double>>();
        if (cw.size() != 2) {
            throw ValidationError("model: class_weights must have 2 entries");
        }
        m.class_weights = {cw[0], cw[1]};
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("model: ") + e.what());
    }
    if (!m.weights.allFinite() || !std::isfinite(m.bias)) {
        throw ValidationError("model: non-finite parameters");
    }
    return m;
}

std::array<double, 2> balanced_class_weights(std::span<const int> labels) {
    std::array<std::size_t, 2> counts{0, 0};
    for (int y : labels) {
        if (y != 0 && y != 1) {
            throw ValidationError("labels must be 0 or 1");
        }
        ++counts[static_cast<std::size_t>(y)];
    }
    if (counts[0] == 0 || counts[1] == 0) {
        throw ValidationError("single-class input: both labels must be present");
    }
    const double n = static_cast<double>(labels.size());
    return {n / (2.0 * static_cast<double>(counts[0])), n / (2.0 * static_cast<double>(counts[1]))};
}

double svm_primal_objective(const RowMatrix& x, std::span<const int> labels, const Eigen::VectorXd& w, double b,
                            double c, const std::array<double, 2>& class_weights, double bias_scale) {
    double reg = w.squaredNorm();
    if (bias_scale > 0.0) {
        reg += (b / bias_scale) * (b / bias_scale);
    }
    double loss = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const int yl = labels[static_cast<std::size_t>(i)];
        const double y = yl == 1 ? 1.0 : -1.0;
        const double m = x.row(i).dot(w) + b;
        loss += class_weights[static_cast<std::size_t>(yl)] * std::max(0.0, 1.0 - y * m);
    }
    return 0.5 * reg + c * loss;
}

LinearModel train_linear_svm(const RowMatrix& x, std::span<const int> labels, const SvmOptions& options) {
    const auto n = static_cast<std::size_t>(x.rows());
    if (labels.size() != n) {
        throw ValidationError("train_linear_svm: label count does not match rows");
    }
    if (!(options.c > 0.0)) {
        throw ValidationError("train_linear_svm: C must be positive");
    }
    const auto bw = balanced_class_weights(labels);
    LinearModel model;
    model.c = options.c;
    model.class_weights = options.balanced ? bw : std::array<double, 2>{1.0, 1.0};

    const double s = options.bias_scale;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(x.cols());
    double wb = 0.0;  // weight of the augmented constant feature
    std::vector<double> alpha(n, 0.0);
    std::vector<double> qii(n);
    std::vector<double> upper(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        qii[i] = x.row(static_cast<Eigen::Index>(i)).squaredNorm() + s * s;
        upper[i] = options.c * model.class_weights[static_cast<std::size_t>(labels[i])];
        y[i] = labels[i] == 1 ? 1.0 : -1.0;
    }

    double violation = 0.0;
    std::size_t epoch = 0;
    for (; epoch < options.max_epochs; ++epoch) {
        violation = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (qii[i] <= 0.0) {
                continue;
            }
            const auto row = x.row(static_cast<Eigen::Index>(i));
            const double g = y[i] * (row.dot(w) + wb * s) - 1.0;
            double pg = g;
            if (alpha[i] <= 0.0) {
                pg = std::min(g, 0.0);
            } else if (alpha[i] >= upper[i]) {
                pg = std::max(g, 0.0);
            }
            violation = std::max(violation, std::abs(pg));
            if (pg != 0.0) {
                const double old = alpha[i];
                alpha[i] = std::clamp(old - g / qii[i], 0.0, upper[i]);
                const double delta = (alpha[i] - old) * y[i];
                if (delta != 0.0) {
                    w.noalias() += delta * row.transpose();
                    wb += delta * s;
                }
            }
        }
        if (violation < options.tol) {
            break;
        }
    }
    if (epoch == options.max_epochs) {
        throw ConvergenceError("linear SVM did not converge after " + std::to_string(options.max_epochs) +
                               " epochs (max violation " + std::to_string(violation) + ", n=" + std::to_string(n) +
                               ", C=" + std::to_string(options.c) + ")");
    }
    model.weights = std::move(w);
    model.bias = wb * s;
    return model;
}

}  // namespace stylearena

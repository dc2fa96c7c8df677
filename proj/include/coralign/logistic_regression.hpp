#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "coralign/error.hpp"
#include "coralign/matrix.hpp"

namespace coralign {

struct ClassWeights {
    double w0 = 1.0;
    double w1 = 1.0;
};

struct LogRegModel {
    std::vector<double> weights;
    double intercept = 0.0;
    double c_inverse_reg = 1.0;
    bool converged = false;
    std::size_t iterations = 0;

    std::size_t dim() const { return weights.size(); }
};

/// w_c = n / (2 n_c). Throws if either class is absent.
inline ClassWeights balanced_weights(const std::vector<int>& y) {
    std::size_t n0 = 0;
    std::size_t n1 = 0;
    for (int label : y) {
        if (label == 0) {
            ++n0;
        } else if (label == 1) {
            ++n1;
        } else {
            throw ValidationError("balanced_weights: labels must be 0 or 1");
        }
    }
    if (n0 == 0 || n1 == 0) {
        throw ValidationError("balanced_weights: both classes required");
    }
    const double n = static_cast<double>(n0 + n1);
    return ClassWeights{n / (2.0 * static_cast<double>(n0)), n / (2.0 * static_cast<double>(n1))};
}

namespace detail {

// log(1 + exp(-m)) without overflow for any margin.
inline double softplus_neg(double m) {
    if (m >= 0.0) {
        return std::log1p(std::exp(-m));
    }
    return -m + std::log1p(std::exp(m));
}

// sigma(-m) at full relative precision; used in gradients.
inline double sigmoid_neg(double m) {
    if (m >= 0.0) {
        const double e = std::exp(-m);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(m));
}

inline void check_logreg_inputs(const Matrix& x, const std::vector<int>& y) {
    if (y.size() != x.rows()) {
        throw ValidationError("logistic regression: label count does not match row count");
    }
    for (int label : y) {
        if (label != 0 && label != 1) {
            throw ValidationError("logistic regression: labels must be 0 or 1");
        }
    }
}

inline double margin(const Matrix& x, std::size_t i, const std::vector<double>& w, double b,
                     int label) {
    double score = b;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        score += x(i, j) * w[j];
    }
    const double sign = 2.0 * label - 1.0;
    return sign * score;
}

inline double loss_only(const std::vector<double>& w, double b, const Matrix& x,
                        const std::vector<int>& y, const ClassWeights& cw, double c) {
    double loss = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double sample_weight = y[i] == 1 ? cw.w1 : cw.w0;
        loss += sample_weight * softplus_neg(margin(x, i, w, b, y[i]));
    }
    double reg = 0.0;
    for (double wj : w) {
        reg += wj * wj;
    }
    return loss + reg / (2.0 * c);
}

}  // namespace detail

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad_weights;
    double grad_intercept = 0.0;
};

/// Weighted negative log-likelihood with L2 penalty (1/(2c)) ||w||^2,
/// intercept unregularized, and its exact gradient.
inline LossGrad loss_and_gradient(const std::vector<double>& w, double b, const Matrix& x,
                                  const std::vector<int>& y, const ClassWeights& cw, double c) {
    if (w.size() != x.cols()) {
        throw ValidationError("loss_and_gradient: weight dimension mismatch");
    }
    if (c <= 0.0) {
        throw ValidationError("loss_and_gradient: c must be positive");
    }
    detail::check_logreg_inputs(x, y);

    LossGrad out;
    out.grad_weights.assign(w.size(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double sample_weight = y[i] == 1 ? cw.w1 : cw.w0;
        const double sign = 2.0 * y[i] - 1.0;
        const double m = detail::margin(x, i, w, b, y[i]);
        out.loss += sample_weight * detail::softplus_neg(m);
        // d/dm log(1+exp(-m)) = -sigma(-m)
        const double dm = -sample_weight * detail::sigmoid_neg(m) * sign;
        for (std::size_t j = 0; j < x.cols(); ++j) {
            out.grad_weights[j] += dm * x(i, j);
        }
        out.grad_intercept += dm;
    }
    for (std::size_t j = 0; j < w.size(); ++j) {
        out.loss += w[j] * w[j] / (2.0 * c);
        out.grad_weights[j] += w[j] / c;
    }
    return out;
}

/// Full-batch gradient descent with Armijo backtracking (beta=0.5,
/// c1=1e-4, initial step 1.0 each iteration). Stops when the gradient
/// max-norm drops to 1e-6 or after 1000 iterations. `loss_trace`, when
/// given, receives the loss after every accepted step.
inline LogRegModel fit_logreg(const Matrix& x, const std::vector<int>& y, double c,
                              const ClassWeights& cw, std::vector<double>* loss_trace = nullptr) {
    if (c <= 0.0) {
        throw ValidationError("fit_logreg: c must be positive");
    }
    detail::check_logreg_inputs(x, y);
    bool saw0 = false;
    bool saw1 = false;
    for (int label : y) {
        (label == 1 ? saw1 : saw0) = true;
    }
    if (!saw0 || !saw1) {
        throw ValidationError("fit_logreg: both classes required");
    }

    constexpr double kGradTol = 1e-6;
    constexpr std::size_t kMaxIterations = 1000;
    constexpr double kArmijoC1 = 1e-4;
    constexpr double kBacktrackBeta = 0.5;
    constexpr int kMaxBacktracks = 60;

    LogRegModel model;
    model.weights.assign(x.cols(), 0.0);
    model.c_inverse_reg = c;

    LossGrad state = loss_and_gradient(model.weights, model.intercept, x, y, cw, c);
    if (loss_trace != nullptr) {
        loss_trace->push_back(state.loss);
    }
    while (model.iterations < kMaxIterations) {
        double grad_max = std::abs(state.grad_intercept);
        double grad_sq = state.grad_intercept * state.grad_intercept;
        for (double g : state.grad_weights) {
            grad_max = std::max(grad_max, std::abs(g));
            grad_sq += g * g;
        }
        if (grad_max <= kGradTol) {
            model.converged = true;
            break;
        }

        double step = 1.0;
        std::vector<double> trial_w(x.cols());
        double trial_b = 0.0;
        bool accepted = false;
        for (int k = 0; k < kMaxBacktracks; ++k) {
            for (std::size_t j = 0; j < x.cols(); ++j) {
                trial_w[j] = model.weights[j] - step * state.grad_weights[j];
            }
            trial_b = model.intercept - step * state.grad_intercept;
            const double trial_loss = detail::loss_only(trial_w, trial_b, x, y, cw, c);
            if (trial_loss <= state.loss - kArmijoC1 * step * grad_sq) {
                accepted = true;
                break;
            }
            step *= kBacktrackBeta;
        }
        if (!accepted) {
            break;  // stalled at numerical precision
        }
        model.weights = trial_w;
        model.intercept = trial_b;
        ++model.iterations;
        state = loss_and_gradient(model.weights, model.intercept, x, y, cw, c);
        if (loss_trace != nullptr) {
            loss_trace->push_back(state.loss);
        }
        if (!std::isfinite(state.loss)) {
            throw NumericalError("fit_logreg: loss diverged");
        }
    }
    if (!model.converged) {
        double grad_max = std::abs(state.grad_intercept);
        for (double g : state.grad_weights) {
            grad_max = std::max(grad_max, std::abs(g));
        }
        model.converged = grad_max <= kGradTol;
    }
    return model;
}

/// sigma(x w + b). The negative branch is written so that negating the
/// model maps p to exactly 1 - p.
inline std::vector<double> predict_proba(const LogRegModel& model, const Matrix& x) {
    if (x.cols() != model.dim()) {
        throw ValidationError("predict_proba: feature dimension mismatch");
    }
    std::vector<double> probs(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double m = model.intercept;
        for (std::size_t j = 0; j < x.cols(); ++j) {
            m += x(i, j) * model.weights[j];
        }
        if (m >= 0.0) {
            probs[i] = 1.0 / (1.0 + std::exp(-m));
        } else {
            probs[i] = 1.0 - 1.0 / (1.0 + std::exp(m));
        }
    }
    return probs;
}

/// Label 1 iff probability >= threshold.
inline std::vector<int> predict(const LogRegModel& model, const Matrix& x,
                                double threshold = 0.5) {
    if (threshold < 0.0 || threshold > 1.0) {
        throw ValidationError("predict: threshold must lie in [0,1]");
    }
    const std::vector<double> probs = predict_proba(model, x);
    std::vector<int> labels(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        labels[i] = probs[i] >= threshold ? 1 : 0;
    }
    return labels;
}

}  // namespace coralign

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <vector>

#include "coralign/error.hpp"
#include "coralign/logistic_regression.hpp"
#include "coralign/rng.hpp"
#include "helpers.hpp"

using namespace coralign;

namespace {

struct RecallPair {
    double recall0 = 0.0;
    double recall1 = 0.0;
};

RecallPair class_recalls(const std::vector<int>& truth, const std::vector<int>& predicted) {
    std::size_t hit0 = 0, n0 = 0, hit1 = 0, n1 = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 0) {
            ++n0;
            hit0 += predicted[i] == 0;
        } else {
            ++n1;
            hit1 += predicted[i] == 1;
        }
    }
    return {static_cast<double>(hit0) / static_cast<double>(n0),
            static_cast<double>(hit1) / static_cast<double>(n1)};
}

}  // namespace

TEST_CASE("balanced_weights hand cases", "[classifier]") {
    {
        const std::vector<int> y{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
        const ClassWeights w = balanced_weights(y);
        CHECK(w.w0 == 1.0);
        CHECK(w.w1 == 1.0);
    }
    {
        const std::vector<int> y{0, 0, 0, 0, 0, 0, 0, 0, 1, 1};
        const ClassWeights w = balanced_weights(y);
        CHECK(w.w0 == Catch::Approx(0.625).margin(1e-15));
        CHECK(w.w1 == Catch::Approx(2.5).margin(1e-15));
    }
    {
        // 9,005 negatives vs 1,002 positives.
        std::vector<int> y(9005, 0);
        y.insert(y.end(), 1002, 1);
        const ClassWeights w = balanced_weights(y);
        CHECK(w.w0 == Catch::Approx(0.5557).margin(1e-3));
        CHECK(w.w1 == Catch::Approx(4.994).margin(1e-3));
    }
    CHECK_THROWS_AS(balanced_weights({0, 0, 0}), ValidationError);
    CHECK_THROWS_AS(balanced_weights({1, 1}), ValidationError);
    CHECK_THROWS_AS(balanced_weights({0, 1, 2}), ValidationError);
}

TEST_CASE("loss at the zero model is n log 2", "[classifier]") {
    SplitMix64 rng(51, "test/loss_zero");
    const Matrix x = test_helpers::random_matrix(rng, 12, 3);
    const std::vector<int> y{0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
    const LossGrad lg = loss_and_gradient(std::vector<double>(3, 0.0), 0.0, x, y,
                                          ClassWeights{1.0, 1.0}, 0.01);
    CHECK(lg.loss == Catch::Approx(12.0 * std::log(2.0)).margin(1e-12));
}

TEST_CASE("gradient matches central finite differences", "[classifier]") {
    SplitMix64 rng(52, "test/grad_fd");
    for (int rep = 0; rep < 5; ++rep) {
        const Matrix x = test_helpers::random_matrix(rng, 20, 5);
        std::vector<int> y(20);
        for (std::size_t i = 0; i < 20; ++i) y[i] = rng.next_double() < 0.5 ? 0 : 1;
        y[0] = 0;
        y[1] = 1;
        std::vector<double> w(5);
        for (double& wj : w) wj = rng.next_gaussian() * 0.5;
        const double b = rng.next_gaussian() * 0.5;
        const ClassWeights cw{0.5 + rng.next_double(), 0.5 + rng.next_double()};
        const double c = 0.05 + rng.next_double();

        const LossGrad lg = loss_and_gradient(w, b, x, y, cw, c);
        const double step = 1e-6;
        auto loss_at = [&](const std::vector<double>& wv, double bv) {
            return loss_and_gradient(wv, bv, x, y, cw, c).loss;
        };
        for (std::size_t j = 0; j < 5; ++j) {
            std::vector<double> plus = w, minus = w;
            plus[j] += step;
            minus[j] -= step;
            const double fd = (loss_at(plus, b) - loss_at(minus, b)) / (2.0 * step);
            CHECK(std::abs(lg.grad_weights[j] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
        }
        const double fd_b = (loss_at(w, b + step) - loss_at(w, b - step)) / (2.0 * step);
        CHECK(std::abs(lg.grad_intercept - fd_b) <= 1e-5 * std::max(1.0, std::abs(fd_b)));
    }
}

TEST_CASE("doubling c halves the regularization term", "[classifier]") {
    SplitMix64 rng(53, "test/reg_halving");
    const Matrix x = test_helpers::random_matrix(rng, 15, 4);
    std::vector<int> y(15);
    for (std::size_t i = 0; i < 15; ++i) y[i] = i % 2;
    std::vector<double> w{0.3, -1.2, 0.7, 2.0};
    double norm_sq = 0.0;
    for (double wj : w) norm_sq += wj * wj;

    const double c = 0.25;
    const ClassWeights cw{1.0, 1.0};
    const double loss_c = loss_and_gradient(w, 0.1, x, y, cw, c).loss;
    const double loss_2c = loss_and_gradient(w, 0.1, x, y, cw, 2.0 * c).loss;
    CHECK(loss_c - loss_2c == Catch::Approx(norm_sq / (4.0 * c)).epsilon(1e-12));

    CHECK_THROWS_AS(loss_and_gradient(w, 0.0, x, y, cw, 0.0), ValidationError);
    CHECK_THROWS_AS(loss_and_gradient({0.0}, 0.0, x, y, cw, 1.0), ValidationError);
}

TEST_CASE("extreme regularization shrinks the model to chance", "[classifier]") {
    SplitMix64 rng(54, "test/extreme_reg");
    const std::size_t n = 50;
    Matrix x = test_helpers::random_matrix(rng, n, 4);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = i % 2;
    const LogRegModel model = fit_logreg(x, y, 1e-8, balanced_weights(y));
    double norm = 0.0;
    for (double wj : model.weights) norm += wj * wj;
    CHECK(std::sqrt(norm) <= 1e-3);
    for (double p : predict_proba(model, x)) {
        CHECK(std::abs(p - 0.5) <= 0.01);
    }
}

TEST_CASE("separable one-dimensional data trains to full accuracy", "[classifier]") {
    Matrix x(6, 1);
    const double vals[6] = {-3.0, -2.0, -1.0, 1.0, 2.0, 3.0};
    for (std::size_t i = 0; i < 6; ++i) x(i, 0) = vals[i];
    const std::vector<int> y{0, 0, 0, 1, 1, 1};
    const LogRegModel model = fit_logreg(x, y, 0.01, balanced_weights(y));
    const std::vector<int> predicted = predict(model, x);
    CHECK(predicted == y);
}

TEST_CASE("fit_logreg is deterministic and monotone in loss", "[classifier]") {
    SplitMix64 rng(55, "test/fit_determinism");
    const std::size_t n = 80;
    Matrix x = test_helpers::random_matrix(rng, n, 6);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = x(i, 0) + 0.3 * rng.next_gaussian() > 0.5 ? 1 : 0;
    }
    y[0] = 0;
    y[1] = 1;
    const ClassWeights cw = balanced_weights(y);

    std::vector<double> trace;
    const LogRegModel a = fit_logreg(x, y, 0.5, cw, &trace);
    const LogRegModel b = fit_logreg(x, y, 0.5, cw);
    CHECK(a.weights == b.weights);
    CHECK(a.intercept == b.intercept);
    CHECK(a.iterations == b.iterations);
    CHECK(a.converged == b.converged);

    REQUIRE(trace.size() >= 2);
    for (std::size_t i = 1; i < trace.size(); ++i) {
        CHECK(trace[i] <= trace[i - 1]);
    }
}

TEST_CASE("objective is convex along random segments", "[classifier]") {
    SplitMix64 rng(56, "test/convexity");
    const Matrix x = test_helpers::random_matrix(rng, 30, 4);
    std::vector<int> y(30);
    for (std::size_t i = 0; i < 30; ++i) y[i] = i % 3 == 0 ? 1 : 0;
    const ClassWeights cw{0.8, 1.7};
    const double c = 0.3;

    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> w1(4), w2(4);
        for (std::size_t j = 0; j < 4; ++j) {
            w1[j] = rng.next_gaussian();
            w2[j] = rng.next_gaussian();
        }
        const double b1 = rng.next_gaussian();
        const double b2 = rng.next_gaussian();
        const double f1 = loss_and_gradient(w1, b1, x, y, cw, c).loss;
        const double f2 = loss_and_gradient(w2, b2, x, y, cw, c).loss;
        for (int t = 1; t < 10; ++t) {
            const double alpha = t / 10.0;
            std::vector<double> w(4);
            for (std::size_t j = 0; j < 4; ++j) w[j] = (1.0 - alpha) * w1[j] + alpha * w2[j];
            const double b = (1.0 - alpha) * b1 + alpha * b2;
            const double f = loss_and_gradient(w, b, x, y, cw, c).loss;
            CHECK(f <= (1.0 - alpha) * f1 + alpha * f2 + 1e-9);
        }
    }
}

TEST_CASE("balanced weights close the recall gap on 9:1 data", "[classifier]") {
    int demo_holds = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SplitMix64 rng(seed, "test/imbalance_demo");
        const std::size_t n0 = 900;
        const std::size_t n1 = 100;
        Matrix x(n0 + n1, 1);
        std::vector<int> y(n0 + n1);
        for (std::size_t i = 0; i < n0; ++i) {
            x(i, 0) = rng.next_gaussian();
            y[i] = 0;
        }
        for (std::size_t i = 0; i < n1; ++i) {
            x(n0 + i, 0) = rng.next_gaussian() + 1.5;
            y[n0 + i] = 1;
        }

        const LogRegModel balanced = fit_logreg(x, y, 0.01, balanced_weights(y));
        const LogRegModel unweighted = fit_logreg(x, y, 0.01, ClassWeights{1.0, 1.0});
        const RecallPair br = class_recalls(y, predict(balanced, x));
        const RecallPair ur = class_recalls(y, predict(unweighted, x));
        const double balanced_gap = std::abs(br.recall0 - br.recall1);
        const double unweighted_gap = std::abs(ur.recall0 - ur.recall1);
        if (balanced_gap < 0.15 && unweighted_gap > 0.3) ++demo_holds;
    }
    CHECK(demo_holds >= 9);
}

TEST_CASE("predict_proba saturation and symmetry", "[classifier]") {
    LogRegModel zero;
    zero.weights = {0.0, 0.0};
    Matrix x(3, 2);
    x(0, 0) = 5.0;
    x(0, 1) = -2.0;
    x(1, 0) = 0.0;
    x(1, 1) = 0.0;
    x(2, 0) = -7.0;
    x(2, 1) = 1.0;
    for (double p : predict_proba(zero, x)) CHECK(p == 0.5);

    LogRegModel steep;
    steep.weights = {1.0};
    Matrix far(1, 1);
    far(0, 0) = 1e4;
    CHECK(std::abs(predict_proba(steep, far)[0] - 1.0) <= 1e-12);

    SplitMix64 rng(57, "test/sigmoid_symmetry");
    LogRegModel model;
    model.weights = {0.7, -1.3};
    model.intercept = 0.25;
    LogRegModel flipped;
    flipped.weights = {-0.7, 1.3};
    flipped.intercept = -0.25;
    Matrix pts(50, 2);
    for (std::size_t i = 0; i < 50; ++i) {
        pts(i, 0) = rng.next_gaussian() * 3.0;
        pts(i, 1) = rng.next_gaussian() * 3.0;
    }
    const std::vector<double> p = predict_proba(model, pts);
    const std::vector<double> q = predict_proba(flipped, pts);
    for (std::size_t i = 0; i < 50; ++i) {
        CHECK(q[i] == 1.0 - p[i]);
    }

    CHECK_THROWS_AS(predict_proba(model, Matrix(1, 3)), ValidationError);
}

TEST_CASE("predict thresholds and tie rule", "[classifier]") {
    LogRegModel zero;
    zero.weights = {0.0};
    Matrix x(2, 1);
    x(0, 0) = 1.0;
    x(1, 0) = -1.0;
    // p = 0.5 exactly; tie goes to the positive class.
    CHECK(predict(zero, x) == std::vector<int>{1, 1});
    CHECK(predict(zero, x, 0.0) == std::vector<int>{1, 1});
    CHECK(predict(zero, x, 1.0) == std::vector<int>{0, 0});
    CHECK_THROWS_AS(predict(zero, x, 1.5), ValidationError);
    CHECK_THROWS_AS(predict(zero, x, -0.1), ValidationError);
}

TEST_CASE("fit_logreg validation", "[classifier]") {
    Matrix x(4, 2);
    CHECK_THROWS_AS(fit_logreg(x, {0, 0, 0, 0}, 0.01, ClassWeights{}), ValidationError);
    CHECK_THROWS_AS(fit_logreg(x, {0, 1, 0, 1}, -1.0, ClassWeights{}), ValidationError);
    CHECK_THROWS_AS(fit_logreg(x, {0, 1}, 0.01, ClassWeights{}), ValidationError);
}

#include <catch2/catch_amalgamated.hpp>

#include "taskgen/nn.hpp"

using namespace taskgen;

namespace {

// The floor turns the check absolute below 1e-3, keeping central-difference
// cancellation noise (~1e-12 on unit-scale losses) out of the ratio.
double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3}); }

/// Central finite difference over every parameter coordinate.
template <typename Loss>
void check_param_grads(const std::vector<nn::Param*>& ps, Loss loss, double tol) {
    for (std::size_t i = 0; i < nn::param_count(ps); ++i) {
        double& w = nn::param_coord(ps, i);
        const double w0 = w;
        const double h = 1e-5 * std::max(1.0, std::abs(w0));
        w = w0 + h;
        const double lp = loss();
        w = w0 - h;
        const double lm = loss();
        w = w0;
        const double fd = (lp - lm) / (2.0 * h);
        INFO("coordinate " << i << " analytic " << nn::grad_coord(ps, i) << " fd " << fd);
        CHECK(rel_err(nn::grad_coord(ps, i), fd) < tol);
    }
}

template <typename Loss>
void check_input_grads(std::vector<double>& x, const std::vector<double>& dx, Loss loss, double tol) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double x0 = x[i];
        const double h = 1e-5 * std::max(1.0, std::abs(x0));
        x[i] = x0 + h;
        const double lp = loss();
        x[i] = x0 - h;
        const double lm = loss();
        x[i] = x0;
        CHECK(rel_err(dx[i], (lp - lm) / (2.0 * h)) < tol);
    }
}

}  // namespace

TEST_CASE("orthogonal init produces orthonormal rows and columns") {
    Rng rng(7);
    std::vector<double> wide(4 * 7);
    nn::init_orthogonal(wide, 4, 7, rng);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            double dot = 0.0;
            for (int j = 0; j < 7; ++j) dot += wide[a * 7 + j] * wide[b * 7 + j];
            CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) < 1e-9);
        }
    std::vector<double> tall(7 * 4);
    nn::init_orthogonal(tall, 7, 4, rng);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            double dot = 0.0;
            for (int i = 0; i < 7; ++i) dot += tall[i * 4 + a] * tall[i * 4 + b];
            CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) < 1e-9);
        }
}

TEST_CASE("dense layer gradients match finite differences") {
    Rng rng(1);
    nn::Dense d(5, 4, rng);
    std::vector<double> x(5);
    for (double& v : x) v = rng.next_normal();
    auto loss = [&]() {
        double s = 0.0;
        for (double v : d.forward(x)) s += 0.5 * v * v;
        return s;
    };
    nn::zero_grads(d.params());
    const std::vector<double> y = d.forward(x);
    const std::vector<double> dx = d.backward(x, y);
    check_param_grads(d.params(), loss, 1e-6);
    check_input_grads(x, dx, loss, 1e-6);
}

TEST_CASE("conv layer gradients match finite differences") {
    Rng rng(2);
    nn::Conv3x3 cv(2, 3, rng);
    std::vector<double> x(2 * 4 * 4);
    for (double& v : x) v = rng.next_normal();
    auto loss = [&]() {
        double s = 0.0;
        for (double v : cv.forward(x, 4, 4)) s += 0.5 * v * v;
        return s;
    };
    nn::zero_grads(cv.params());
    const std::vector<double> y = cv.forward(x, 4, 4);
    const std::vector<double> dx = cv.backward(x, 4, 4, y);
    check_param_grads(cv.params(), loss, 1e-6);
    check_input_grads(x, dx, loss, 1e-6);
}

TEST_CASE("max pooling keeps block maxima and routes gradients to them") {
    std::vector<double> x = {1, 5, 2, 0,   //
                             3, 4, 8, 6,   //
                             0, 2, 1, 1,   //
                             9, 7, 3, 2};
    const std::vector<double> y = nn::maxpool2(x, 1, 4, 4);
    CHECK(y == std::vector<double>{5, 8, 9, 3});
    const std::vector<double> dx = nn::maxpool2_backward(x, 1, 4, 4, {1, 2, 3, 4});
    std::vector<double> want(16, 0.0);
    want[1] = 1;   // 5
    want[6] = 2;   // 8
    want[12] = 3;  // 9
    want[14] = 4;  // 3
    CHECK(dx == want);
    CHECK_THROWS_AS(nn::maxpool2(x, 1, 4, 3), std::invalid_argument);
}

TEST_CASE("lstm gradients match finite differences across two steps") {
    Rng rng(3);
    nn::LstmLayer l(3, 4, rng);
    std::vector<double> x0(3), x1(3);
    for (double& v : x0) v = rng.next_normal();
    for (double& v : x1) v = rng.next_normal();
    const std::vector<double> h0(4, 0.0), c0(4, 0.0);
    auto loss = [&]() {
        nn::LstmLayer::Cache a, b;
        l.forward(x0, h0, c0, a);
        l.forward(x1, a.h, a.c, b);
        double s = 0.0;
        for (double v : a.h) s += 0.5 * v * v;
        for (double v : b.h) s += 0.5 * v * v;
        return s;
    };
    nn::zero_grads(l.params());
    nn::LstmLayer::Cache a, b;
    l.forward(x0, h0, c0, a);
    l.forward(x1, a.h, a.c, b);
    std::vector<double> dx1, dhPrev, dcPrev;
    l.backward(b, b.h, std::vector<double>(4, 0.0), dx1, dhPrev, dcPrev);
    for (std::size_t i = 0; i < 4; ++i) dhPrev[i] += a.h[i];
    std::vector<double> dx0, dh0, dc0;
    l.backward(a, dhPrev, dcPrev, dx0, dh0, dc0);
    check_param_grads(l.params(), loss, 1e-6);
    check_input_grads(x0, dx0, loss, 1e-6);
    check_input_grads(x1, dx1, loss, 1e-6);
}

TEST_CASE("embedding scatters gradients into the selected row") {
    Rng rng(4);
    nn::Embedding e(5, 3, rng);
    const std::vector<double> row = e.forward(2);
    CHECK(row.size() == 3);
    e.backward(2, {1.0, 2.0, 3.0});
    e.backward(2, {1.0, 0.0, 0.0});
    CHECK(e.table.g[2 * 3 + 0] == 2.0);
    CHECK(e.table.g[2 * 3 + 1] == 2.0);
    CHECK(e.table.g[2 * 3 + 2] == 3.0);
    CHECK(e.table.g[0] == 0.0);
    CHECK_THROWS_AS(e.forward(5), std::out_of_range);
}

TEST_CASE("adam minimizes a quadratic") {
    nn::Param p(6);
    Rng rng(5);
    nn::init_uniform(p.w, 1.0, rng);
    const std::vector<double> target = {0.3, -0.7, 1.1, 0.0, -2.0, 0.5};
    nn::AdamConfig cfg;
    cfg.lr = 0.05;
    nn::Adam opt({&p}, cfg);
    for (int it = 0; it < 500; ++it) {
        for (std::size_t i = 0; i < p.size(); ++i) p.g[i] = p.w[i] - target[i];
        opt.step();
    }
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(p.w[i] - target[i]) < 1e-3);
}

TEST_CASE("masked cross entropy normalizes over the legal set") {
    const std::vector<double> logits(12, 0.0);
    const std::vector<int> legal = {3, 7, 9};
    const std::vector<double> p = nn::softmax_masked(logits, legal);
    CHECK(p.size() == 3);
    double sum = 0.0;
    for (double v : p) sum += v;
    CHECK(sum == Catch::Approx(1.0).margin(1e-12));
    const nn::LossGrad ce = nn::masked_cross_entropy(logits, legal, 7);
    CHECK(ce.loss == Catch::Approx(std::log(3.0)).margin(1e-12));
    CHECK(ce.dlogits[7] == Catch::Approx(1.0 / 3.0 - 1.0).margin(1e-12));
    CHECK(ce.dlogits[3] == Catch::Approx(1.0 / 3.0).margin(1e-12));
    CHECK(ce.dlogits[0] == 0.0);
    double gsum = 0.0;
    for (double v : ce.dlogits) gsum += v;
    CHECK(std::abs(gsum) < 1e-12);
    CHECK_THROWS_AS(nn::masked_cross_entropy(logits, legal, 4), std::invalid_argument);
    const nn::LossGrad lp = nn::masked_log_prob(logits, legal, 9);
    CHECK(lp.loss == Catch::Approx(-std::log(3.0)).margin(1e-12));
    CHECK(lp.dlogits[9] == Catch::Approx(1.0 - 1.0 / 3.0).margin(1e-12));
}

TEST_CASE("smooth l1 is quadratic inside the unit band and linear outside") {
    auto [l1, d1] = nn::smooth_l1(2.0, 1.5);
    CHECK(l1 == Catch::Approx(0.125));
    CHECK(d1 == Catch::Approx(0.5));
    auto [l2, d2] = nn::smooth_l1(3.0, 1.0);
    CHECK(l2 == Catch::Approx(1.5));
    CHECK(d2 == 1.0);
    auto [l3, d3] = nn::smooth_l1(0.0, 2.0);
    CHECK(l3 == Catch::Approx(1.5));
    CHECK(d3 == -1.0);
}

TEST_CASE("gradient clipping and scaling") {
    nn::Param a(2), b(1);
    a.g = {3.0, 0.0};
    b.g = {4.0};
    nn::clip_grad_norm({&a, &b}, 1.0);
    const double norm = std::sqrt(a.g[0] * a.g[0] + a.g[1] * a.g[1] + b.g[0] * b.g[0]);
    CHECK(norm == Catch::Approx(1.0).margin(1e-12));
    CHECK(a.g[0] == Catch::Approx(0.6).margin(1e-12));
    nn::scale_grads({&a, &b}, 2.0);
    CHECK(b.g[0] == Catch::Approx(1.6).margin(1e-12));
}

TEST_CASE("parameter json round trip flags shape problems") {
    nn::Param a(3), b(2);
    a.w = {1.0, -2.0, 0.25};
    b.w = {7.0, 8.0};
    const nn::Json j = nn::params_to_json({{"alpha", &a}, {"beta", &b}});
    nn::Param a2(3), b2(2);
    nn::params_from_json(j, {{"alpha", &a2}, {"beta", &b2}});
    CHECK(a2.w == a.w);
    CHECK(b2.w == b.w);
    nn::Param wrong(4);
    CHECK_THROWS_AS(nn::params_from_json(j, {{"alpha", &wrong}}), CheckpointError);
    nn::Param c(1);
    CHECK_THROWS_AS(nn::params_from_json(j, {{"gamma", &c}}), CheckpointError);
}

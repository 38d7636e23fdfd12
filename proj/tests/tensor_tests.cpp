#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "sslv3/gradcheck.hpp"
#include "sslv3/param_store.hpp"
#include "sslv3/rng.hpp"
#include "sslv3/tensor.hpp"

using namespace sslv3;

namespace {

// independent triple-loop oracle for y = x.w + b
std::vector<double> linear_oracle(const std::vector<double>& x, const std::vector<double>& w,
                                  const std::vector<double>& b, int rows, int in, int out) {
    std::vector<double> y(static_cast<size_t>(rows) * out, 0.0);
    for (int r = 0; r < rows; ++r) {
        for (int o = 0; o < out; ++o) {
            double s = b[o];
            for (int i = 0; i < in; ++i) s += x[r * in + i] * w[i * out + o];
            y[r * out + o] = s;
        }
    }
    return y;
}

// direct-summation oracle for the padded temporal convolution
std::vector<double> conv_oracle(const std::vector<double>& x, const std::vector<double>& k,
                                bool before) {
    const int n = static_cast<int>(x.size());
    const int ks = static_cast<int>(k.size());
    std::vector<double> y(n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < ks; ++j) {
            const int src = before ? i - (ks - 1) + j : i + j;
            if (src >= 0 && src < n) y[i] += k[j] * x[src];
        }
    }
    return y;
}

}  // namespace

TEST_CASE("linear identity and forced arithmetic") {
    auto x = Tensor::from_data({1, 2}, {1.0, 0.0});
    auto w = Tensor::from_data({2, 2}, {1.0, 0.0, 0.0, 1.0});
    auto b = Tensor::from_data({2}, {0.0, 0.0});
    auto y = linear(x, w, b);
    CHECK(y->data[0] == doctest::Approx(1.0));
    CHECK(y->data[1] == doctest::Approx(0.0));

    auto x2 = Tensor::from_data({1, 2}, {1.0, 2.0});
    auto w2 = Tensor::from_data({2, 1}, {1.0, 1.0});
    auto b2 = Tensor::from_data({1}, {0.5});
    auto y2 = linear(x2, w2, b2);
    CHECK(y2->data[0] == doctest::Approx(3.5));
}

TEST_CASE("linear matches triple-loop oracle on random inputs") {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const int rows = 1 + static_cast<int>(rng.below(5));
        const int in = 1 + static_cast<int>(rng.below(7));
        const int out = 1 + static_cast<int>(rng.below(6));
        auto x = Tensor::randn({rows, in}, rng);
        auto w = Tensor::randn({in, out}, rng);
        auto b = Tensor::randn({out}, rng);
        auto y = linear(x, w, b);
        auto want = linear_oracle(x->data, w->data, b->data, rows, in, out);
        for (size_t i = 0; i < want.size(); ++i) {
            CHECK(std::fabs(y->data[i] - want[i]) < 1e-12);
        }
    }
}

TEST_CASE("linear rejects mismatched shapes naming both") {
    auto x = Tensor::zeros({2, 3});
    auto w = Tensor::zeros({4, 2});
    auto b = Tensor::zeros({2});
    try {
        linear(x, w, b);
        FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
        std::string msg = e.what();
        CHECK(msg.find("[2,3]") != std::string::npos);
        CHECK(msg.find("[4,2]") != std::string::npos);
    }
}

TEST_CASE("softmax symmetry and forced values") {
    auto a = softmax(Tensor::from_data({2}, {0.0, 0.0}), -1);
    CHECK(a->data[0] == doctest::Approx(0.5));
    CHECK(a->data[1] == doctest::Approx(0.5));

    auto b = softmax(Tensor::from_data({2}, {std::log(2.0), 0.0}), -1);
    CHECK(b->data[0] == doctest::Approx(2.0 / 3.0));
    CHECK(b->data[1] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("softmax matches extended-precision oracle") {
    Rng rng(7);
    auto x = Tensor::randn({7}, rng, 3.0);
    auto y = softmax(x, 0);
    long double z = 0.0L;
    long double mx = x->data[0];
    for (double v : x->data) mx = std::max<long double>(mx, v);
    std::vector<long double> e(7);
    for (int i = 0; i < 7; ++i) {
        e[i] = expl(static_cast<long double>(x->data[i]) - mx);
        z += e[i];
    }
    for (int i = 0; i < 7; ++i) {
        const double want = static_cast<double>(e[i] / z);
        CHECK(std::fabs(y->data[i] - want) / want < 1e-10);
    }
}

TEST_CASE("softmax rows sum to one for arbitrary axes") {
    Rng rng(19);
    auto x = Tensor::randn({3, 4, 5}, rng, 4.0);
    for (int axis = 0; axis < 3; ++axis) {
        auto y = softmax(x, axis);
        // accumulate sums along the reduced axis
        auto s = sum(y, axis);
        for (double v : s->data) CHECK(std::fabs(v - 1.0) < 1e-6);
        for (double v : y->data) CHECK(v > 0.0);
    }
}

TEST_CASE("conv1d_padded matches direct summation") {
    auto x = Tensor::from_data({4}, {1, 2, 3, 4});
    auto k = Tensor::from_data({4}, {1, 1, 1, 1});
    auto before = conv1d_padded(x, k, PadSide::before);
    CHECK(before->data == std::vector<double>{1, 3, 6, 10});
    auto after = conv1d_padded(x, k, PadSide::after);
    CHECK(after->data == std::vector<double>{10, 9, 7, 4});

    auto ident = conv1d_padded(x, Tensor::from_data({1}, {1.0}), PadSide::before);
    CHECK(ident->data == x->data);
}

TEST_CASE("conv1d_padded random instances against oracle, both sides") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(9));
        const int ks = 1 + static_cast<int>(rng.below(6));
        auto x = Tensor::randn({n}, rng);
        auto k = Tensor::randn({ks}, rng);
        for (auto side : {PadSide::before, PadSide::after}) {
            auto y = conv1d_padded(x, k, side);
            CHECK(y->size() == n);  // length preserved
            auto want = conv_oracle(x->data, k->data, side == PadSide::before);
            for (int i = 0; i < n; ++i) CHECK(std::fabs(y->data[i] - want[i]) < 1e-10);
        }
    }
}

TEST_CASE("conv1d_padded rejects non-positive kernel size") {
    auto x = Tensor::from_data({3}, {1, 2, 3});
    CHECK_THROWS_AS(conv1d_padded(x, Tensor::zeros({2, 2}), PadSide::before), DimensionError);
}

TEST_CASE("backward on sum gives ones") {
    ParameterStore store;
    Rng rng(3);
    auto w = store.add("w", ParamGroup::backbone, Tensor::from_data({3}, {5.0, -1.0, 2.0}));
    store.zero_grad();
    Tape::Scope scope;
    auto loss = sum_all(w);
    backward(loss);
    for (double g : w->grad) CHECK(g == doctest::Approx(1.0));
}

TEST_CASE("backward on quadratic gives the parameter itself") {
    ParameterStore store;
    auto w = store.add("w", ParamGroup::backbone, Tensor::from_data({3}, {1.0, -2.0, 3.0}));
    store.zero_grad();
    Tape::Scope scope;
    auto loss = scale(sum_all(mul(w, w)), 0.5);
    backward(loss);
    CHECK(w->grad[0] == doctest::Approx(1.0));
    CHECK(w->grad[1] == doctest::Approx(-2.0));
    CHECK(w->grad[2] == doctest::Approx(3.0));
}

TEST_CASE("two-layer MLP with softmax cross-entropy matches finite differences") {
    ParameterStore store;
    Rng rng(17);
    const int in = 5, hid = 4, out = 3, bs = 4;
    auto w1 = store.add("w1", ParamGroup::backbone, Tensor::randn({in, hid}, rng, 0.5));
    auto b1 = store.add("b1", ParamGroup::backbone, Tensor::randn({hid}, rng, 0.1));
    auto w2 = store.add("w2", ParamGroup::backbone, Tensor::randn({hid, out}, rng, 0.5));
    auto b2 = store.add("b2", ParamGroup::backbone, Tensor::randn({out}, rng, 0.1));
    auto x = Tensor::randn({bs, in}, rng);
    std::vector<int> labels = {0, 2, 1, 0};

    auto f = [&]() {
        auto h = gelu(linear(x, w1, b1));
        auto logits = linear(h, w2, b2);
        auto lp = log_softmax(logits);
        return scale(mean_all(take_index(lp, labels)), -1.0);
    };
    auto report = grad_check(f, store, 1e-5, 1e-4);
    INFO("max rel err ", report.max_rel_err);
    CHECK(report.all_within_tol());
}

TEST_CASE("repeated backward on one graph doubles every gradient exactly") {
    ParameterStore store;
    Rng rng(23);
    auto w = store.add("w", ParamGroup::backbone, Tensor::randn({4}, rng));
    store.zero_grad();
    Tape::Scope scope;
    auto loss = sum_all(mul(w, tanh(w)));
    backward(loss);
    std::vector<double> once = w->grad;
    backward(loss);
    for (size_t i = 0; i < once.size(); ++i) CHECK(w->grad[i] == 2.0 * once[i]);
}

TEST_CASE("unreachable parameters keep zero gradient") {
    ParameterStore store;
    Rng rng(29);
    auto w = store.add("w", ParamGroup::backbone, Tensor::randn({3}, rng));
    auto unused = store.add("unused", ParamGroup::vqa, Tensor::randn({2}, rng));
    store.zero_grad();
    Tape::Scope scope;
    auto loss = sum_all(w);
    backward(loss);
    for (double g : unused->grad) CHECK(g == 0.0);
}

TEST_CASE("backward outside a recorded graph is a state error") {
    auto t = Tensor::scalar(1.0);
    CHECK_THROWS_AS(backward(t), StateError);
    Tape::Scope scope;
    CHECK_THROWS_AS(backward(t), StateError);  // t was never recorded
}

TEST_CASE("forward overflow raises instead of propagating non-finite values") {
    auto big = Tensor::scalar(1e308);
    CHECK_THROWS_AS(sslv3::exp(big), NumericError);
    CHECK_THROWS_AS(add(big, big), NumericError);
    CHECK_THROWS_AS(sslv3::log(Tensor::scalar(0.0)), NumericError);
}

TEST_CASE("grad_check is near-exact for a quadratic form") {
    ParameterStore store;
    Rng rng(31);
    auto w = store.add("w", ParamGroup::backbone, Tensor::randn({6}, rng));
    auto f = [&]() { return scale(sum_all(mul(w, w)), 0.5); };
    auto report = grad_check(f, store, 1e-5, 1e-4);
    CHECK(report.max_rel_err < 1e-8);
    CHECK(report.all_within_tol());
}

TEST_CASE("grad_check with zero tolerance flags every parameter") {
    ParameterStore store;
    Rng rng(37);
    store.add("a", ParamGroup::backbone, Tensor::randn({2}, rng));
    store.add("b", ParamGroup::cls, Tensor::randn({3}, rng));
    auto f = [&]() {
        return add(sum_all(store.get("a")), sum_all(store.get("b")));
    };
    auto report = grad_check(f, store, 1e-5, 0.0);
    CHECK(report.flagged_names().size() == store.tensor_count());
}

TEST_CASE("gradients of random composite graphs match finite differences") {
    for (uint64_t seed = 1; seed <= 8; ++seed) {
        ParameterStore store;
        Rng rng(seed * 101);
        const int n = 2 + static_cast<int>(rng.below(4));
        auto a = store.add("a", ParamGroup::backbone, Tensor::randn({n, n}, rng, 0.7));
        auto b = store.add("b", ParamGroup::backbone, Tensor::randn({n, n}, rng, 0.7));
        auto g = store.add("g", ParamGroup::backbone, Tensor::full({n}, 1.0));
        auto bias = store.add("bias", ParamGroup::backbone, Tensor::zeros({n}));
        auto f = [&]() {
            auto h = matmul(a, b);
            h = layer_norm(h, g, bias);
            h = softmax(h, -1);
            auto t = mul(tanh(a), softplus(b));
            auto u = add(sum_all(h), sum_all(t));
            auto v = mean_all(gelu(slice(concat({a, b}, 0), 0, 1, n)));
            return add(u, v);
        };
        auto report = grad_check(f, store, 1e-5, 1e-4);
        INFO("seed ", seed, " max rel err ", report.max_rel_err);
        CHECK(report.all_within_tol());
    }
}

TEST_CASE("parameter store rejects duplicate names and partitions groups") {
    ParameterStore store;
    store.add("x", ParamGroup::vqa, Tensor::zeros({2}));
    CHECK_THROWS_AS(store.add("x", ParamGroup::cls, Tensor::zeros({2})), ValueError);
    store.add("y", ParamGroup::cls, Tensor::zeros({1}));
    CHECK(store.names(ParamGroup::vqa) == std::vector<std::string>{"x"});
    CHECK(store.names(ParamGroup::cls) == std::vector<std::string>{"y"});
    CHECK(store.names(ParamGroup::backbone).empty());
    CHECK(store.scalar_count() == 3);
}

TEST_CASE("reshape transpose broadcast slice concat round numerics") {
    Rng rng(41);
    auto x = Tensor::randn({2, 3, 4}, rng);
    auto tr = transpose(x, {2, 0, 1});
    CHECK(tr->shape() == Shape{4, 2, 3});
    CHECK(tr->data[0] == x->data[0]);
    // x[1][2][3] should land at tr[3][1][2]
    CHECK(tr->data[(3 * 2 + 1) * 3 + 2] == x->data[(1 * 3 + 2) * 4 + 3]);

    auto bc = broadcast_to(Tensor::from_data({1, 3}, {1, 2, 3}), {2, 3});
    CHECK(bc->data == std::vector<double>{1, 2, 3, 1, 2, 3});

    auto sl = slice(x, 1, 1, 2);
    CHECK(sl->shape() == Shape{2, 2, 4});
    CHECK(sl->data[0] == x->data[4]);

    auto cc = concat({Tensor::from_data({1, 2}, {1, 2}), Tensor::from_data({2, 2}, {3, 4, 5, 6})},
                     0);
    CHECK(cc->data == std::vector<double>{1, 2, 3, 4, 5, 6});

    CHECK(reshape(x, {6, 4})->data == x->data);
    CHECK_THROWS_AS(reshape(x, {5, 5}), DimensionError);
}

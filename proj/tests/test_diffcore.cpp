#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "hpst/errors.hpp"
#include "hpst/tensor.hpp"

using namespace hpst::diff;

namespace {

Tensor random_tensor(std::mt19937_64& rng, std::vector<size_t> shape, double lo = -1.0,
                     double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Tensor t(std::move(shape));
    for (size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
    return t;
}

}  // namespace

TEST_CASE("linear with identity weight and zero bias is the identity") {
    Tape tape;
    std::mt19937_64 rng(1);
    Tensor x = random_tensor(rng, {3, 4});
    Tensor w({4, 4});
    for (size_t i = 0; i < 4; ++i) w.at(i, i) = 1.0;
    int y = tape.linear(tape.input(x), tape.input(w), tape.input(Tensor({4})));
    for (size_t i = 0; i < x.size(); ++i) CHECK(tape.value(y)[i] == x[i]);
}

TEST_CASE("linear with zero rows") {
    Tape tape;
    std::mt19937_64 rng(2);
    int y = tape.linear(tape.input(Tensor({0, 4})), tape.input(random_tensor(rng, {4, 2})),
                        tape.input(Tensor({2})));
    CHECK(tape.value(y).rows() == 0);
    int loss = tape.sum_all(y);
    tape.backward(loss);
    for (size_t i = 0; i < 8; ++i) CHECK(tape.grad(1)[i] == 0.0);
}

TEST_CASE("linear matches hand matmul and finite differences") {
    std::mt19937_64 rng(3);
    Tensor x = random_tensor(rng, {3, 4});
    Tensor w = random_tensor(rng, {4, 2});
    Tensor b = random_tensor(rng, {2});
    {
        Tape tape;
        int y = tape.linear(tape.input(x), tape.input(w), tape.input(b));
        for (size_t i = 0; i < 3; ++i)
            for (size_t o = 0; o < 2; ++o) {
                double expect = b[o];
                for (size_t k = 0; k < 4; ++k) expect += x.at(i, k) * w.at(k, o);
                CHECK(tape.value(y).at(i, o) == doctest::Approx(expect).epsilon(1e-12));
            }
    }
    double err = grad_check(
        [](Tape& t, const std::vector<int>& in) {
            return t.sum_all(t.relu(t.linear(in[0], in[1], in[2])));
        },
        {x, w, b});
    CHECK(err < 1e-6);
}

TEST_CASE("relu forward") {
    Tape tape;
    int y = tape.relu(tape.input(Tensor({3}, {-1.0, 0.0, 2.0})));
    CHECK(tape.value(y)[0] == 0.0);
    CHECK(tape.value(y)[1] == 0.0);
    CHECK(tape.value(y)[2] == 2.0);
}

TEST_CASE("layer_norm of a constant row is zero before gain/shift") {
    Tape tape;
    Tensor x({2, 4});
    for (size_t i = 0; i < x.size(); ++i) x[i] = 3.25;
    Tensor gain({4});
    for (size_t i = 0; i < 4; ++i) gain[i] = 1.0;
    int y = tape.layer_norm(tape.input(x), tape.input(gain), tape.input(Tensor({4})));
    for (size_t i = 0; i < x.size(); ++i) CHECK(tape.value(y)[i] == 0.0);
}

TEST_CASE("segment_softmax basics") {
    Tape tape;
    int y = tape.segment_softmax(tape.input(Tensor({4}, {5.0, 5.0, 5.0, 2.0})), {0, 0, 0, 1}, 2);
    CHECK(tape.value(y)[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(tape.value(y)[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(tape.value(y)[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(tape.value(y)[3] == 1.0);  // singleton segment is exactly one
}

TEST_CASE("segment_softmax is stable for large logits") {
    Tape tape;
    int y = tape.segment_softmax(tape.input(Tensor({2}, {1000.0, 1001.0})), {0, 0}, 1);
    const double e = std::exp(1.0);
    CHECK(tape.value(y)[0] == doctest::Approx(1.0 / (1.0 + e)).epsilon(1e-12));
    CHECK(tape.value(y)[1] == doctest::Approx(e / (1.0 + e)).epsilon(1e-12));
}

TEST_CASE("segment_softmax sums to one per segment and matches finite differences") {
    std::mt19937_64 rng(5);
    Tensor logits = random_tensor(rng, {12}, -3.0, 3.0);
    std::vector<int> seg = {0, 0, 0, 1, 1, 2, 2, 2, 2, 4, 4, 4};  // segment 3 empty
    {
        Tape tape;
        int y = tape.segment_softmax(tape.input(logits), seg, 5);
        std::vector<double> sums(5, 0.0);
        for (size_t i = 0; i < 12; ++i) sums[seg[i]] += tape.value(y)[i];
        for (int s : {0, 1, 2, 4}) CHECK(sums[s] == doctest::Approx(1.0).epsilon(1e-12));
    }
    Tensor weights = random_tensor(rng, {12});
    double err = grad_check(
        [&](Tape& t, const std::vector<int>& in) {
            // weighted sum so the gradient is nontrivial
            int sm = t.segment_softmax(in[0], seg, 5);
            return t.sum_all(t.mul(sm, in[1]));
        },
        {logits, weights});
    CHECK(err < 1e-6);
}

TEST_CASE("segment_sum matches a sequential loop and leaves empty segments zero") {
    std::mt19937_64 rng(6);
    Tensor v = random_tensor(rng, {7, 3});
    std::vector<int> seg = {2, 0, 2, 2, 4, 0, 4};  // segments 1 and 3 empty
    Tape tape;
    int y = tape.segment_sum(tape.input(v), seg, 5);
    std::vector<std::vector<double>> expect(5, std::vector<double>(3, 0.0));
    for (size_t i = 0; i < 7; ++i)
        for (size_t j = 0; j < 3; ++j) expect[seg[i]][j] += v.at(i, j);
    for (size_t s = 0; s < 5; ++s)
        for (size_t j = 0; j < 3; ++j) CHECK(tape.value(y).at(s, j) == expect[s][j]);

    double err = grad_check(
        [&](Tape& t, const std::vector<int>& in) {
            return t.sum_all(t.relu(t.segment_sum(in[0], seg, 5)));
        },
        {v});
    CHECK(err < 1e-6);
}

TEST_CASE("elementwise and structural op gradients match finite differences") {
    std::mt19937_64 rng(8);
    Tensor a = random_tensor(rng, {4, 3});
    Tensor b = random_tensor(rng, {4, 3});
    Tensor s = random_tensor(rng, {4});
    Tensor gain = random_tensor(rng, {3}, 0.5, 1.5);
    Tensor shift = random_tensor(rng, {3});

    CHECK(grad_check([](Tape& t, const std::vector<int>& in) {
              return t.sum_all(t.mul(in[0], in[1]));
          }, {a, b}) < 1e-6);
    CHECK(grad_check([](Tape& t, const std::vector<int>& in) {
              return t.sum_all(t.add(t.scale(in[0], 2.5), in[1]));
          }, {a, b}) < 1e-6);
    CHECK(grad_check([](Tape& t, const std::vector<int>& in) {
              return t.sum_all(t.relu(t.concat_cols(in[0], in[1])));
          }, {a, b}) < 1e-6);
    CHECK(grad_check([](Tape& t, const std::vector<int>& in) {
              return t.sum_all(t.relu(t.gather_rows(in[0], {2, 0, 2, 3})));
          }, {a}) < 1e-6);
    CHECK(grad_check([](Tape& t, const std::vector<int>& in) {
              return t.sum_all(t.mul(t.layer_norm(in[0], in[1], in[2]), in[0]));
          }, {a, gain, shift}) < 1e-5);
    CHECK(grad_check([](Tape& t, const std::vector<int>& in) {
              return t.sum_all(t.mul_rows(in[0], in[1]));
          }, {a, s}) < 1e-6);
    CHECK(grad_check([](Tape& t, const std::vector<int>& in) {
              return t.sum_all(t.relu(t.row_dot(in[0], in[1])));
          }, {a, b}) < 1e-6);
    CHECK(grad_check([](Tape& t, const std::vector<int>& in) {
              return t.sum_all(t.logsumexp_rows(in[0]));
          }, {a}) < 1e-6);
    CHECK(grad_check([](Tape& t, const std::vector<int>& in) {
              return t.sum_all(t.pick(in[0], {1, 0, 2, 1}));
          }, {a}) < 1e-6);
}

TEST_CASE("grad of sum is exactly ones") {
    Tape tape;
    std::mt19937_64 rng(9);
    Tensor x = random_tensor(rng, {5});
    int id = tape.input(x);
    tape.backward(tape.sum_all(id));
    for (size_t i = 0; i < 5; ++i) CHECK(tape.grad(id)[i] == 1.0);
    CHECK(grad_check([](Tape& t, const std::vector<int>& in) { return t.sum_all(in[0]); },
                     {x}) < 1e-10);
}

TEST_CASE("relu gradient away from the kink") {
    Tensor x({4}, {-0.7, 0.3, 1.4, -2.0});
    CHECK(grad_check([](Tape& t, const std::vector<int>& in) {
              return t.sum_all(t.relu(in[0]));
          }, {x}) < 1e-6);
}

TEST_CASE("non-finite input is rejected") {
    Tape tape;
    Tensor bad({2}, {1.0, std::numeric_limits<double>::quiet_NaN()});
    CHECK_THROWS_AS(tape.input(bad), hpst::NonFiniteError);
}

TEST_CASE("shape mismatch is rejected") {
    Tape tape;
    std::mt19937_64 rng(10);
    int a = tape.input(random_tensor(rng, {2, 3}));
    int b = tape.input(random_tensor(rng, {3, 2}));
    CHECK_THROWS_AS(tape.add(a, b), hpst::ShapeMismatch);
}

TEST_CASE("deterministic forward and backward") {
    std::mt19937_64 rng(12);
    Tensor x = random_tensor(rng, {6, 4});
    Tensor w = random_tensor(rng, {4, 4});
    auto run = [&]() {
        Tape tape;
        int xi = tape.input(x);
        int y = tape.linear(xi, tape.input(w), tape.input(Tensor({4})));
        int l = tape.sum_all(tape.relu(y));
        tape.backward(l);
        std::vector<double> out(tape.grad(xi).data(), tape.grad(xi).data() + x.size());
        out.push_back(tape.value(l)[0]);
        return out;
    };
    CHECK(run() == run());
}

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "gvg/rng.hpp"
#include "gvg/serialize.hpp"
#include "gvg/tensor.hpp"

using namespace gvg;

namespace {

Tensor random_tensor(const Shape& shape, Rng& rng, bool rg = false) {
    return Tensor::randn(shape, rng, 1.0, rg);
}

}  // namespace

TEST_CASE("matmul identity and shape errors") {
    Tensor a = Tensor::from({2, 2}, {1, 2, 3, 4});
    Tensor eye = Tensor::from({2, 2}, {1, 0, 0, 1});
    Tensor c = matmul(a, eye);
    CHECK(c.data() == std::vector<double>{1, 2, 3, 4});

    Tensor bad = Tensor::from({3, 2}, {0, 0, 0, 0, 0, 0});
    CHECK_THROWS_WITH_AS(matmul(a, bad), doctest::Contains("[2,2]"), std::invalid_argument);
    CHECK_THROWS_AS(add(a, bad), std::invalid_argument);
}

TEST_CASE("row softmax is uniform on constant rows and sums to one") {
    Tensor x = Tensor::from({1, 3}, {0, 0, 0});
    Tensor y = softmax_rows(x);
    for (int i = 0; i < 3; i++) CHECK(y.at(i) == doctest::Approx(1.0 / 3).epsilon(1e-14));

    Rng rng(11);
    Tensor z = softmax_rows(random_tensor({5, 7}, rng));
    for (int r = 0; r < 5; r++) {
        double s = 0;
        for (int c = 0; c < 7; c++) {
            CHECK(z.at(r, c) >= 0.0);
            s += z.at(r, c);
        }
        CHECK(std::fabs(s - 1.0) < 1e-12);
    }
}

TEST_CASE("l2 normalize rows matches direct norm computation") {
    Tensor x = Tensor::from({1, 2}, {3, 4});
    Tensor y = l2_normalize_rows(x);
    CHECK(y.at(0) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(y.at(1) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK_THROWS_AS(l2_normalize_rows(Tensor::zeros({1, 4})), std::invalid_argument);
}

TEST_CASE("backward on sum gives ones, on x*x gives 2x") {
    Tensor x = Tensor::from({3}, {5, -1, 2}, true);
    backward(sum(x));
    CHECK(x.grad() == std::vector<double>{1, 1, 1});

    Tensor x2 = Tensor::from({2}, {1, 2}, true);
    backward(sum(mul(x2, x2)));
    CHECK(x2.grad() == std::vector<double>{2, 4});
}

TEST_CASE("backward rejects non-scalar and disconnected losses") {
    Tensor x = Tensor::from({2}, {1, 2}, true);
    CHECK_THROWS_AS(backward(mul(x, x)), std::invalid_argument);
    CHECK_THROWS_AS(backward(Tensor::scalar(3.0)), std::invalid_argument);
}

TEST_CASE("shared subexpressions accumulate gradients") {
    Tensor x = Tensor::from({2}, {3, -2}, true);
    Tensor y = mul(x, x);
    backward(add(sum(y), sum(y)));
    // d/dx of 2*sum(x^2) = 4x
    CHECK(x.grad() == std::vector<double>{12, -8});
}

TEST_CASE("leaves off the loss path keep exact zero gradients") {
    Tensor x = Tensor::from({2}, {1, 2}, true);
    Tensor unused = Tensor::from({2}, {7, 7}, true);
    backward(sum(x));
    CHECK(unused.grad() == std::vector<double>{0, 0});
}

TEST_CASE("matmul-mean gradient matches finite differences") {
    Rng rng(3);
    Tensor w = random_tensor({4, 3}, rng, true);
    Tensor point = random_tensor({2, 4}, rng);
    double err = grad_check([&](const Tensor& x) { return mean(matmul(x, w)); }, point, 1e-6);
    CHECK(err < 1e-6);
}

TEST_CASE("grad_check on sum of squares and on constants") {
    Tensor p = Tensor::from({3}, {1, 2, 3});
    double err = grad_check([](const Tensor& x) { return sum(mul(x, x)); }, p, 1e-6);
    CHECK(err < 1e-6);

    double cerr = grad_check([](const Tensor&) { return Tensor::scalar(4.2); }, p, 1e-6);
    CHECK(cerr == 0.0);

    CHECK_THROWS_AS(
        grad_check([](const Tensor& x) { return log(sub(x, x)); }, p, 1e-6),
        std::exception);
}

TEST_CASE("every differentiable primitive passes grad_check at random points") {
    struct Case {
        const char* name;
        std::function<Tensor(const Tensor&)> f;
        Shape shape;
        bool positive_domain;
    };
    Rng aux(99);
    Tensor other = random_tensor({3, 4}, aux, true);
    Tensor square = random_tensor({4, 4}, aux, true);
    Tensor bias = random_tensor({4}, aux, true);
    std::vector<Case> cases = {
        {"add", [&](const Tensor& x) { return sum(add(x, other)); }, {3, 4}, false},
        {"add_broadcast", [&](const Tensor& x) { return sum(mul(add(x, bias), add(x, bias))); }, {3, 4}, false},
        {"sub", [&](const Tensor& x) { return sum(mul(sub(x, other), sub(x, other))); }, {3, 4}, false},
        {"mul", [&](const Tensor& x) { return sum(mul(x, other)); }, {3, 4}, false},
        {"scalar_mul", [](const Tensor& x) { return sum(scalar_mul(x, -2.5)); }, {3, 4}, false},
        {"matmul", [&](const Tensor& x) { return sum(mul(matmul(x, square), matmul(x, square))); }, {3, 4}, false},
        {"transpose", [&](const Tensor& x) { return sum(mul(transpose(x), transpose(x))); }, {3, 4}, false},
        {"softmax_rows", [&](const Tensor& x) { return sum(mul(softmax_rows(x), other)); }, {3, 4}, false},
        {"log", [](const Tensor& x) { return sum(log(x)); }, {3, 4}, true},
        {"exp", [](const Tensor& x) { return sum(exp(x)); }, {3, 4}, false},
        {"sigmoid", [&](const Tensor& x) { return sum(mul(sigmoid(x), other)); }, {3, 4}, false},
        {"gelu", [&](const Tensor& x) { return sum(mul(gelu(x), other)); }, {3, 4}, false},
        {"mean", [](const Tensor& x) { return mean(mul(x, x)); }, {3, 4}, false},
        {"sum", [](const Tensor& x) { return sum(mul(x, x)); }, {3, 4}, false},
        {"l2_normalize_rows", [&](const Tensor& x) { return sum(mul(l2_normalize_rows(x), other)); }, {3, 4}, false},
        {"layer_norm_rows", [&](const Tensor& x) { return sum(mul(layer_norm_rows(x), other)); }, {3, 4}, false},
        {"concat0", [&](const Tensor& x) { return sum(mul(concat({x, other}, 0), concat({x, other}, 0))); }, {3, 4}, false},
        {"concat1", [&](const Tensor& x) { return sum(mul(concat({x, other}, 1), concat({x, other}, 1))); }, {3, 4}, false},
        {"slice", [](const Tensor& x) {
             Tensor s = slice(x, 1, 1, 3);
             Tensor t = slice(x, 0, 0, 2);
             return add(sum(mul(s, s)), sum(mul(t, t)));
         }, {3, 4}, false},
        {"embedding_lookup", [](const Tensor& x) {
             Tensor e = embedding_lookup(x, {2, 0, 2});
             return sum(mul(e, e));
         }, {3, 4}, false},
    };
    for (const auto& c : cases) {
        CAPTURE(c.name);
        for (int trial = 0; trial < 10; trial++) {
            Rng rng(1000 + trial);
            Tensor point = Tensor::zeros(c.shape);
            for (double& v : point.mutable_data())
                v = c.positive_domain ? 0.5 + rng.uniform() : rng.gaussian();
            double err = grad_check(c.f, point, 1e-6);
            CHECK_MESSAGE(err < 1e-4, c.name << " trial " << trial << " err " << err);
        }
    }
}

TEST_CASE("stop_gradient blocks the backward path exactly") {
    Tensor x = Tensor::from({2}, {1, 2}, true);
    Tensor y = stop_gradient(mul(x, x));
    CHECK_FALSE(y.requires_grad());
    Tensor z = add(mul(x, x), y);
    backward(sum(z));
    CHECK(x.grad() == std::vector<double>{2, 4});
}

TEST_CASE("identical seeds give bit-identical tapes and gradients") {
    auto build = [](uint64_t seed) {
        Rng rng(seed);
        Tensor a = random_tensor({4, 4}, rng, true);
        Tensor b = random_tensor({4, 4}, rng, true);
        Tensor loss = mean(mul(softmax_rows(matmul(a, b)), gelu(sub(a, b))));
        backward(loss);
        return std::tuple<Tensor, Tensor, Tensor>(a, b, loss);
    };
    auto [a1, b1, l1] = build(42);
    auto [a2, b2, l2] = build(42);
    CHECK(a1.grad() == a2.grad());
    CHECK(b1.grad() == b2.grad());
    auto t1 = tape_of(l1);
    auto t2 = tape_of(l2);
    REQUIRE(t1.size() == t2.size());
    for (size_t i = 0; i < t1.size(); i++) {
        CHECK(std::string(t1[i]->op) == t2[i]->op);
        CHECK(t1[i]->data == t2[i]->data);
    }
}

TEST_CASE("tape is topologically ordered and visits each node once") {
    Tensor x = Tensor::from({2}, {1, 2}, true);
    Tensor y = mul(x, x);
    Tensor loss = sum(add(y, y));
    auto order = tape_of(loss);
    // every node's parents appear before it
    for (size_t i = 0; i < order.size(); i++) {
        for (const auto& p : order[i]->parents) {
            bool found_before = false;
            for (size_t j = 0; j < i; j++)
                if (order[j] == p.get()) found_before = true;
            CHECK(found_before);
        }
    }
    std::set<Node*> unique(order.begin(), order.end());
    CHECK(unique.size() == order.size());
}

TEST_CASE("adam: zero gradient leaves params unchanged, hand-checked step") {
    AdamConfig cfg;
    cfg.lr = 0.1;
    std::vector<double> p = {1.5}, g0 = {0.0}, m, v;
    adam_update(p, g0, m, v, 1, cfg);
    CHECK(p[0] == 1.5);

    std::vector<double> p1 = {1.0}, g1 = {1.0}, m1, v1;
    adam_update(p1, g1, m1, v1, 1, cfg);
    // bias-corrected first step moves by ~lr
    CHECK(p1[0] == doctest::Approx(1.0 - 0.1 * (1.0 / (1.0 + 1e-8))).epsilon(1e-12));

    std::vector<double> pa = {2.0}, pb = {2.0}, ga = {0.3}, ma, va, mb, vb;
    adam_update(pa, ga, ma, va, 1, cfg);
    adam_update(pb, ga, mb, vb, 1, cfg);
    CHECK(pa[0] == pb[0]);

    std::vector<double> bad_g = {1.0, 2.0};
    CHECK_THROWS_AS(adam_update(pa, bad_g, ma, va, 2, cfg), std::invalid_argument);
}

TEST_CASE("checkpoint round trip is bit-exact in the f32 representation") {
    Rng rng(5);
    std::vector<std::pair<std::string, Tensor>> tensors = {
        {"enc/a", random_tensor({3, 5}, rng)},
        {"enc/b", random_tensor({7}, rng)},
        {"head/w", random_tensor({2, 2, 2}, rng)},
    };
    std::string path = (std::filesystem::temp_directory_path() / "gvg_ckpt_test.gvgt").string();
    save_checkpoint(path, tensors);
    auto loaded = load_checkpoint(path);
    REQUIRE(loaded.size() == 3);
    CHECK(loaded.at("enc/a").shape() == Shape{3, 5});
    for (int64_t i = 0; i < 15; i++)
        CHECK(loaded.at("enc/a").at(i) == static_cast<double>(static_cast<float>(tensors[0].second.at(i))));

    // save(load(x)) reproduces the file byte for byte
    std::string again = path + ".2";
    std::vector<std::pair<std::string, Tensor>> reordered(loaded.begin(), loaded.end());
    save_checkpoint(again, reordered);
    CHECK(read_file(path) == read_file(again));
    std::filesystem::remove(path);
    std::filesystem::remove(again);
}

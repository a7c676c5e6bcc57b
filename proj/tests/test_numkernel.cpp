#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "fgcn/adam.hpp"
#include "fgcn/fd_check.hpp"
#include "fgcn/matrix.hpp"
#include "fgcn/rng.hpp"
#include "fgcn/tape.hpp"

using namespace fgcn;

TEST_CASE("affine identity passes input through") {
    ParamSet ps;
    const int w = ps.add("W", Matrix::identity(2));
    const int b = ps.add("b", Matrix::row({0.0, 0.0}));
    GradientTape tape;
    Var x = tape.constant(Matrix::row({1.0, 2.0}));
    Var y = tape.affine(x, tape.parameter(ps, w), tape.parameter(ps, b));
    CHECK(tape.value(y)(0, 0) == 1.0);
    CHECK(tape.value(y)(0, 1) == 2.0);
}

TEST_CASE("affine zero input passes bias") {
    ParamSet ps;
    const int w = ps.add("W", Matrix(2, 2, {5.0, -1.0, 2.0, 7.0}));
    const int b = ps.add("b", Matrix::row({3.0, 4.0}));
    GradientTape tape;
    Var y = tape.affine(tape.constant(Matrix::row({0.0, 0.0})), tape.parameter(ps, w), tape.parameter(ps, b));
    CHECK(tape.value(y)(0, 0) == 3.0);
    CHECK(tape.value(y)(0, 1) == 4.0);
}

TEST_CASE("affine hand product") {
    ParamSet ps;
    const int w = ps.add("W", Matrix(2, 2, {1.0, 2.0, 3.0, 4.0}));
    const int b = ps.add("b", Matrix::row({0.0, 0.0}));
    GradientTape tape;
    Var y = tape.affine(tape.constant(Matrix::row({1.0, 1.0})), tape.parameter(ps, w), tape.parameter(ps, b));
    CHECK(tape.value(y)(0, 0) == 4.0);
    CHECK(tape.value(y)(0, 1) == 6.0);
}

TEST_CASE("affine rejects mismatched shapes naming both operands") {
    ParamSet ps;
    const int w = ps.add("W", Matrix(3, 2));
    const int b = ps.add("b", Matrix(1, 2));
    GradientTape tape;
    Var x = tape.constant(Matrix::row({1.0, 2.0}));
    CHECK_THROWS_WITH_AS(tape.affine(x, tape.parameter(ps, w), tape.parameter(ps, b)),
                         "affine: x is 1x2 but W is 3x2", shape_error);
}

TEST_CASE("backward of w^2 at w=3 gives 6") {
    ParamSet ps;
    const int w = ps.add("w", Matrix(1, 1, {3.0}));
    GradientTape tape;
    Var wv = tape.parameter(ps, w);
    Var loss = tape.mse(wv, tape.constant(Matrix(1, 1, {0.0})));  // (w-0)^2
    CHECK(tape.scalar(loss) == 9.0);
    tape.backward(loss);
    CHECK(ps.block(w).grad(0, 0) == doctest::Approx(6.0));
}

TEST_CASE("constant loss yields zero parameter gradients") {
    ParamSet ps;
    const int w = ps.add("w", Matrix(1, 3, {1.0, 2.0, 3.0}));
    ps.block(w).grad.fill(42.0);  // stale values must be cleared
    GradientTape tape;
    tape.parameter(ps, w);
    Var loss = tape.mse(tape.constant(Matrix(1, 1, {5.0})), tape.constant(Matrix(1, 1, {1.0})));
    tape.backward(loss);
    for (double g : ps.block(w).grad.values()) CHECK(g == 0.0);
}

TEST_CASE("backward before forward is a state error") {
    GradientTape tape;
    CHECK_THROWS_AS(tape.backward(Var{0}), state_error);
}

TEST_CASE("tape consumed after backward") {
    ParamSet ps;
    const int w = ps.add("w", Matrix(1, 1, {2.0}));
    GradientTape tape;
    Var loss = tape.mse(tape.parameter(ps, w), tape.constant(Matrix(1, 1, {0.0})));
    tape.backward(loss);
    CHECK_THROWS_AS(tape.backward(loss), state_error);
    tape.reset();
    CHECK(tape.op_count() == 0);
}

static double two_layer_loss(ParamSet& ps, int w1, int b1, int w2, int b2, const Matrix& x,
                             const Matrix& target, bool with_grad) {
    GradientTape tape;
    Var h = tape.relu(tape.affine(tape.constant(x), tape.parameter(ps, w1), tape.parameter(ps, b1)));
    Var y = tape.affine(h, tape.parameter(ps, w2), tape.parameter(ps, b2));
    Var loss = tape.mse(y, tape.constant(target));
    const double value = tape.scalar(loss);
    if (with_grad) tape.backward(loss);
    return value;
}

TEST_CASE("random two-layer net matches central finite differences") {
    Rng rng(12345);
    ParamSet ps;
    const int w1 = ps.add("w1", glorot_uniform(4, 6, rng));
    const int b1 = ps.add("b1", Matrix(1, 6));
    const int w2 = ps.add("w2", glorot_uniform(6, 2, rng));
    const int b2 = ps.add("b2", Matrix(1, 2));
    Matrix x(1, 4);
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    Matrix target(1, 2, {0.3, -0.7});

    const double err = fd_check(
        [&](bool g) { return two_layer_loss(ps, w1, b1, w2, b2, x, target, g); }, ps, 1e-4);
    CHECK(err < 1e-4);
}

TEST_CASE("gradient correctness across 25 random configurations") {
    for (int cfg = 0; cfg < 25; ++cfg) {
        Rng rng(1000 + static_cast<std::uint64_t>(cfg) * 7919);
        const std::size_t in = 2 + rng.uniform_index(6);
        const std::size_t hidden = 2 + rng.uniform_index(10);
        const std::size_t out = 1 + rng.uniform_index(3);
        ParamSet ps;
        const int w1 = ps.add("w1", glorot_uniform(in, hidden, rng));
        const int b1 = ps.add("b1", Matrix(1, hidden));
        const int w2 = ps.add("w2", glorot_uniform(hidden, out, rng));
        const int b2 = ps.add("b2", Matrix(1, out));
        Matrix x(1, in);
        for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
        Matrix target(1, out);
        for (std::size_t i = 0; i < target.size(); ++i) target.data()[i] = rng.normal();

        const double err = fd_check(
            [&](bool g) { return two_layer_loss(ps, w1, b1, w2, b2, x, target, g); }, ps, 1e-4);
        CHECK(err < 1e-4);
    }
}

TEST_CASE("scale, concat and mean_rows backward") {
    ParamSet ps;
    const int w = ps.add("w", Matrix(2, 2, {1.0, 2.0, 3.0, 4.0}));
    GradientTape tape;
    Var wv = tape.parameter(ps, w);
    Var pooled = tape.mean_rows(wv);                       // 1x2: (2, 3)
    Var both = tape.concat_cols({pooled, tape.scale(pooled, 2.0)});  // (2,3,4,6)
    Var loss = tape.mse(both, tape.constant(Matrix::row({0.0, 0.0, 0.0, 0.0})));
    CHECK(tape.scalar(loss) == doctest::Approx((4.0 + 9.0 + 16.0 + 36.0) / 4.0));
    const double err = fd_check(
        [&](bool g) {
            GradientTape t;
            Var p = t.mean_rows(t.parameter(ps, w));
            Var c = t.concat_cols({p, t.scale(p, 2.0)});
            Var l = t.mse(c, t.constant(Matrix::row({0.0, 0.0, 0.0, 0.0})));
            const double v = t.scalar(l);
            if (g) t.backward(l);
            return v;
        },
        ps, 1e-5);
    CHECK(err < 1e-7);
}

TEST_CASE("adam zero gradient leaves params unchanged and bumps step") {
    ParamSet ps;
    const int w = ps.add("w", Matrix(1, 3, {1.0, -2.0, 0.5}));
    AdamState st = AdamState::for_params(ps);
    ps.zero_grads();
    adam_step(ps, st, 0.01);
    CHECK(st.step == 1);
    CHECK(ps.block(w).value(0, 0) == 1.0);
    CHECK(ps.block(w).value(0, 1) == -2.0);
    CHECK(ps.block(w).value(0, 2) == 0.5);
}

TEST_CASE("first adam step moves by about lr against gradient sign") {
    for (double g : {0.001, 0.5, 40.0, -3.0}) {
        ParamSet ps;
        const int w = ps.add("w", Matrix(1, 1, {1.0}));
        ps.block(w).grad(0, 0) = g;
        AdamState st = AdamState::for_params(ps);
        adam_step(ps, st, 0.1);
        const double delta = ps.block(w).value(0, 0) - 1.0;
        // bias-corrected moments make |delta| ~ lr for any g != 0
        CHECK(std::fabs(delta) == doctest::Approx(0.1).epsilon(1e-3));
        CHECK(delta * g < 0.0);
    }
}

TEST_CASE("constant gradient moves parameter monotonically") {
    ParamSet ps;
    const int w = ps.add("w", Matrix(1, 1, {5.0}));
    AdamState st = AdamState::for_params(ps);
    double prev = 5.0;
    for (int i = 0; i < 2; ++i) {
        ps.block(w).grad(0, 0) = 2.0;
        adam_step(ps, st, 0.05);
        CHECK(ps.block(w).value(0, 0) < prev);
        prev = ps.block(w).value(0, 0);
    }
}

TEST_CASE("adam rejects non-finite gradients naming the block") {
    ParamSet ps;
    const int w = ps.add("hidden", Matrix(1, 1, {1.0}));
    ps.block(w).grad(0, 0) = std::nan("");
    AdamState st = AdamState::for_params(ps);
    CHECK_THROWS_WITH_AS(adam_step(ps, st, 0.1), "adam_step: non-finite gradient in block 'hidden'",
                         numeric_error);
}

TEST_CASE("fd_check exact for linear model") {
    ParamSet ps;
    const int w = ps.add("w", Matrix(1, 4, {0.5, -1.0, 2.0, 0.0}));
    const Matrix x = Matrix::row({1.0, 2.0, 3.0, 4.0});
    auto loss = [&](bool g) {
        GradientTape t;
        Var wv = t.parameter(ps, w);
        // scalar dot(w, x) built as a 1x1 matmul against a constant column
        Var y = t.matmul(wv, t.constant(x.transposed()));
        Var l = t.scale(y, 1.0);
        const double v = t.scalar(l);
        if (g) t.backward(l);
        return v;
    };
    CHECK(fd_check(loss, ps, 1e-4) < 1e-8);
}

TEST_CASE("fd_check near-exact for quadratic") {
    ParamSet ps;
    const int w = ps.add("w", Matrix(1, 1, {1.0}));
    auto loss = [&](bool g) {
        GradientTape t;
        Var l = t.mse(t.parameter(ps, w), t.constant(Matrix(1, 1, {0.0})));
        const double v = t.scalar(l);
        if (g) t.backward(l);
        return v;
    };
    CHECK(fd_check(loss, ps, 1e-4) < 1e-7);
}

TEST_CASE("fd_check validates eps") {
    ParamSet ps;
    ps.add("w", Matrix(1, 1, {1.0}));
    auto loss = [&](bool) { return 0.0; };
    CHECK_THROWS_AS(fd_check(loss, ps, 0.0), config_error);
    CHECK_THROWS_AS(fd_check(loss, ps, 0.5), config_error);
}

TEST_CASE("fd_check reports non-finite loss at a perturbed point") {
    ParamSet ps;
    const int w = ps.add("w", Matrix(1, 1, {1.0}));
    auto loss = [&](bool) {
        // finite exactly at the base point, infinite once perturbed
        const double v = ps.block(w).value(0, 0);
        return v == 1.0 ? 0.5 : std::numeric_limits<double>::infinity();
    };
    CHECK_THROWS_AS(fd_check(loss, ps, 1e-4), numeric_error);
}

TEST_CASE("determinism: same seed and op sequence give bit-identical params") {
    auto run = [] {
        Rng rng(777);
        ParamSet ps;
        const int w1 = ps.add("w1", glorot_uniform(3, 4, rng));
        const int b1 = ps.add("b1", Matrix(1, 4));
        AdamState st = AdamState::for_params(ps);
        for (int step = 0; step < 10; ++step) {
            Matrix x(1, 3);
            for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
            GradientTape tape;
            Var y = tape.relu(tape.affine(tape.constant(x), tape.parameter(ps, w1), tape.parameter(ps, b1)));
            Var loss = tape.mse(y, tape.constant(Matrix(1, 4, 0.25)));
            tape.backward(loss);
            adam_step(ps, st, 1e-3);
        }
        return ps;
    };
    ParamSet a = run();
    ParamSet b = run();
    REQUIRE(a.block_count() == b.block_count());
    for (std::size_t i = 0; i < a.block_count(); ++i)
        CHECK(a.block(static_cast<int>(i)).value == b.block(static_cast<int>(i)).value);
}

TEST_CASE("matmul rejects mismatched dimensions before computing") {
    Matrix a(2, 3), b(2, 3);
    CHECK_THROWS_AS(matmul(a, b), shape_error);
    GradientTape tape;
    Var av = tape.constant(a);
    Var bv = tape.constant(b);
    CHECK_THROWS_AS(tape.matmul(av, bv), shape_error);
    CHECK_THROWS_AS(tape.mse(av, tape.constant(Matrix(1, 1))), shape_error);
}

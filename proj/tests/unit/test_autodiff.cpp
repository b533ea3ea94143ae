#include <doctest.h>

#include <cmath>

#include "easl/autodiff.hpp"
#include "easl/errors.hpp"
#include "oracle.hpp"

using namespace easl;
using ad::Tensor;
using oracle::gradient_error;
using oracle::random_tensor;

namespace {
constexpr double kTol = 1e-6;
}

TEST_CASE("elementwise ops match finite differences") {
  Rng rng(1);
  Tensor a = random_tensor({3, 4}, rng), b = random_tensor({3, 4}, rng);
  CHECK(gradient_error({a, b}, [&] { return ad::sum(ad::mul(ad::add(a, b), ad::sub(a, b))); }) < kTol);
  CHECK(gradient_error({a}, [&] { return ad::mean(ad::scale(ad::sigmoid(a), -2.5)); }) < kTol);
  CHECK(gradient_error({a, b}, [&] { return ad::mean_abs(ad::sub(a, b)); }) < kTol);
}

TEST_CASE("matmul, transpose and row bias gradients") {
  Rng rng(2);
  Tensor a = random_tensor({2, 3}, rng), w = random_tensor({3, 5}, rng);
  Tensor b1 = random_tensor({5}, rng), b2 = random_tensor({1, 5}, rng);
  auto f = [&] {
    Tensor y = ad::add_row_bias(ad::add_row_bias(ad::matmul(a, w), b1), b2);
    return ad::sum(ad::mul(y, y));
  };
  CHECK(gradient_error({a, w, b1, b2}, f) < kTol);
  CHECK(gradient_error({a}, [&] { return ad::sum(ad::sigmoid(ad::matmul(ad::transpose(a), a))); }) < kTol);
}

TEST_CASE("softmax gradients along both axes and rank 1") {
  Rng rng(3);
  Tensor x = random_tensor({3, 4}, rng, true, -3, 3), wt = random_tensor({3, 4}, rng, false);
  for (std::size_t axis : {0u, 1u}) {
    CHECK(gradient_error({x}, [&] { return ad::sum(ad::mul(ad::softmax(x, axis), wt)); }) < kTol);
  }
  Tensor v = random_tensor({5}, rng), wv = random_tensor({5}, rng, false);
  CHECK(gradient_error({v}, [&] { return ad::sum(ad::mul(ad::softmax(v, 0), wv)); }) < kTol);
}

TEST_CASE("concat and slice gradients") {
  Rng rng(4);
  Tensor a = random_tensor({2, 3}, rng), b = random_tensor({2, 2}, rng), c = random_tensor({1, 5}, rng);
  auto f = [&] {
    Tensor wide = ad::concat({a, b}, 1);     // [2 x 5]
    Tensor tall = ad::concat({wide, c}, 0);  // [3 x 5]
    Tensor s = ad::slice(ad::slice(tall, 0, 1, 3), 1, 2, 5);
    return ad::sum(ad::mul(s, ad::sigmoid(s)));
  };
  CHECK(gradient_error({a, b, c}, f) < kTol);
}

TEST_CASE("forward values against hand arithmetic") {
  Tensor a = Tensor::matrix({{1, 2}, {3, 4}});
  Tensor b = Tensor::matrix({{5, 6}, {7, 8}});
  Tensor p = ad::matmul(a, b);
  CHECK(p.at(0, 0) == 19);
  CHECK(p.at(0, 1) == 22);
  CHECK(p.at(1, 0) == 43);
  CHECK(p.at(1, 1) == 50);
  CHECK(ad::transpose(a).at(0, 1) == 3);
  CHECK(ad::mean_abs(Tensor::matrix({{-1, 2}, {0, -3}})).item() == doctest::Approx(1.5));
  Tensor s = ad::softmax(Tensor::from_data({2}, {0.0, std::log(3.0)}), 0);
  CHECK(s.at(0) == doctest::Approx(0.25));
  CHECK(s.at(1) == doctest::Approx(0.75));
  CHECK(ad::slice(b, 1, 1, 2).at(1, 0) == 8);
}

TEST_CASE("softmax and sigmoid stay finite for extreme inputs") {
  Tensor x = Tensor::from_data({1, 3}, {1000.0, 999.0, -1000.0});
  Tensor s = ad::softmax(x, 1);
  CHECK(std::isfinite(s.at(0, 0)));
  CHECK(s.at(0, 0) + s.at(0, 1) + s.at(0, 2) == doctest::Approx(1.0));
  Tensor g = ad::sigmoid(Tensor::from_data({2}, {-800.0, 800.0}));
  CHECK(g.at(0) >= 0.0);
  CHECK(g.at(0) < 1e-300);
  CHECK(g.at(1) == 1.0);
}

TEST_CASE("second backward doubles leaf gradients") {
  Tensor w = Tensor::from_data({2}, {0.3, -0.7}, true);
  Tensor loss = ad::sum(ad::mul(w, ad::sigmoid(w)));
  ad::backward(loss);
  const std::vector<double> first(w.grad().begin(), w.grad().end());
  ad::backward(loss);
  CHECK(w.grad()[0] == doctest::Approx(2 * first[0]).epsilon(1e-15));
  CHECK(w.grad()[1] == doctest::Approx(2 * first[1]).epsilon(1e-15));
  w.zero_grad();
  CHECK(w.grad()[0] == 0.0);
}

TEST_CASE("abs subgradient at zero is zero") {
  Tensor x = Tensor::from_data({3}, {0.0, 2.0, -1.0}, true);
  ad::backward(ad::mean_abs(x));
  CHECK(x.grad()[0] == 0.0);
  CHECK(x.grad()[1] == doctest::Approx(1.0 / 3));
  CHECK(x.grad()[2] == doctest::Approx(-1.0 / 3));
}

TEST_CASE("shared subexpressions accumulate") {
  Tensor x = Tensor::scalar(3.0, true);
  ad::backward(ad::mul(x, x));  // d(x^2) = 2x
  CHECK(x.grad()[0] == doctest::Approx(6.0));
}

TEST_CASE("contract and dimension errors") {
  Tensor a = Tensor::zeros({2, 3}, true), b = Tensor::zeros({3, 2});
  CHECK_THROWS_AS(ad::add(a, b), DimensionError);
  CHECK_THROWS_AS(ad::matmul(a, a), DimensionError);
  CHECK_THROWS_AS(ad::slice(a, 1, 2, 5), DimensionError);
  CHECK_THROWS_AS(ad::backward(ad::scale(a, 2.0)), ContractError);
  CHECK_THROWS_AS(ad::scale(a, 2.0).mutable_data(), ContractError);
  CHECK_THROWS_AS(Tensor::from_data({2, 2}, {1.0}), DimensionError);
  CHECK_THROWS_AS(ad::add(Tensor(), a), ContractError);
}

TEST_CASE("no graph without a gradient-carrying input") {
  Tensor a = Tensor::ones({2, 2}), b = Tensor::ones({2, 2});
  Tensor c = ad::matmul(a, b);
  CHECK_FALSE(c.requires_grad());
  CHECK(c.is_leaf());
  Tensor w = Tensor::ones({2, 2}, true);
  Tensor d = ad::matmul(a, w);
  CHECK(d.requires_grad());
  CHECK_FALSE(d.is_leaf());
  CHECK(ad::tape_size(ad::sum(d)) >= 3);
  Tensor det = d.detach();
  CHECK(det.is_leaf());
  CHECK_FALSE(det.requires_grad());
  CHECK(det.at(0, 0) == 2.0);
}

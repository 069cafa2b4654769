#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <set>

#include "omplab/dictionary.hpp"
#include "omplab/errors.hpp"
#include "omplab/signal.hpp"

using namespace omplab;

TEST_CASE("x_min") {
  SparseVector x{10, {1, 4, 7}, {3.0, -1.0, 2.0}};
  CHECK(x_min(x) == 1.0);

  SparseVector equal{6, {0, 2, 5}, {0.25, 0.25, 0.25}};
  CHECK(x_min(equal) == 0.25);

  SparseVector empty{6, {}, {}};
  CHECK_THROWS_AS(x_min(empty), Error);
  try {
    x_min(empty);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptySupport);
  }
}

TEST_CASE("sparse vector validation") {
  SparseVector ok{8, {1, 5}, {1.0, -2.0}};
  CHECK_NOTHROW(ok.validate());

  SparseVector unsorted{8, {5, 1}, {1.0, 2.0}};
  CHECK_THROWS_AS(unsorted.validate(), Error);
  SparseVector zero{8, {1, 5}, {1.0, 0.0}};
  CHECK_THROWS_AS(zero.validate(), Error);
  SparseVector range{8, {1, 8}, {1.0, 1.0}};
  CHECK_THROWS_AS(range.validate(), Error);
}

TEST_CASE("synthesize") {
  Dictionary id = normalize_columns(Eigen::MatrixXd::Identity(4, 4));
  SparseVector x{4, {1}, {2.0}};

  SignalInstance clean = synthesize(id, x, 0.0, 9);
  Eigen::VectorXd expect(4);
  expect << 0, 2, 0, 0;
  CHECK(clean.observation == expect);

  SignalInstance a = synthesize(id, x, 0.7, 42);
  SignalInstance b = synthesize(id, x, 0.7, 42);
  CHECK(a.observation == b.observation);
  SignalInstance c = synthesize(id, x, 0.7, 43);
  CHECK(a.observation != c.observation);

  SparseVector wrong{5, {1}, {2.0}};
  CHECK_THROWS_AS(synthesize(id, wrong, 0.0, 1), Error);
  try {
    synthesize(id, wrong, 0.0, 1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("synthesize is linear in the clean part") {
  Dictionary d = build_random_sphere(16, 24, 3);
  SparseVector x1{24, {2, 9}, {1.5, -0.5}};
  SparseVector x2{24, {9, 17}, {2.0, 1.0}};
  SparseVector sum{24, {2, 9, 17}, {1.5, 1.5, 1.0}};

  Eigen::VectorXd y1 = synthesize(d, x1, 0.0, 0).observation;
  Eigen::VectorXd y2 = synthesize(d, x2, 0.0, 0).observation;
  Eigen::VectorXd ys = synthesize(d, sum, 0.0, 0).observation;
  CHECK((ys - y1 - y2).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("noise vector moments at large n") {
  Dictionary big = normalize_columns(Eigen::MatrixXd::Identity(100000, 2));
  SparseVector zero_x{2, {}, {}};
  Eigen::VectorXd w = synthesize(big, zero_x, 1.0, 77).observation;
  double mean = w.mean();
  double var = (w.array() - mean).square().sum() / w.size();
  CHECK(std::abs(mean) <= 0.02);
  CHECK(std::abs(var - 1.0) <= 0.02);
}

TEST_CASE("random support vectors") {
  SparseVector full = random_support_vector(6, 6, 2.0, SignMode::AllPositive, 1);
  CHECK(full.support == std::vector<int>{0, 1, 2, 3, 4, 5});

  SparseVector a = random_support_vector(40, 5, 1.5, SignMode::RandomSign, 10);
  SparseVector b = random_support_vector(40, 5, 1.5, SignMode::RandomSign, 10);
  CHECK(a.support == b.support);
  CHECK(a.values == b.values);
  for (double v : a.values) CHECK(std::abs(v) == 1.5);
  CHECK_NOTHROW(a.validate());

  CHECK_THROWS_AS(random_support_vector(4, 5, 1.0, SignMode::AllPositive, 0), Error);
  try {
    random_support_vector(4, 0, 1.0, SignMode::AllPositive, 0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadSparsity);
  }
}

TEST_CASE("support distribution is uniform") {
  // each index of [0,10) should appear with frequency m/N = 0.2
  const int draws = 10000;
  std::vector<int> counts(10, 0);
  for (int t = 0; t < draws; ++t) {
    SparseVector x = random_support_vector(10, 2, 1.0, SignMode::AllPositive,
                                           1000 + static_cast<std::uint64_t>(t));
    for (int idx : x.support) counts[idx]++;
  }
  for (int c : counts)
    CHECK(std::abs(double(c) / draws - 0.2) <= 0.02);
}

TEST_CASE("sign modes") {
  int negatives = 0;
  for (int t = 0; t < 200; ++t) {
    SparseVector x =
        random_support_vector(30, 4, 1.0, SignMode::RandomSign, 500 + t);
    for (double v : x.values) negatives += v < 0.0;
  }
  CHECK(negatives > 250);  // ~400 expected out of 800
  CHECK(negatives < 550);

  SparseVector pos = random_support_vector(30, 8, 3.0, SignMode::AllPositive, 9);
  for (double v : pos.values) CHECK(v == 3.0);
}

TEST_CASE("text format round trip") {
  SparseVector x{12, {0, 3, 11}, {-1.25, 0.5, 3.0}};
  std::string text = to_text(x);
  CHECK(text.find("# N=12 m=3") == 0);
  SparseVector back = sparse_vector_from_text(text);
  CHECK(back.length == x.length);
  CHECK(back.support == x.support);
  CHECK(back.values == x.values);

  CHECK_THROWS_AS(sparse_vector_from_text("3 1.0\n"), Error);
}

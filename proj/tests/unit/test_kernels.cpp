#include "qfeat/error.hpp"
#include "qfeat/kernels.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <vector>

using namespace qfeat;

namespace {

std::vector<std::vector<std::size_t>> image_patches(std::size_t side, std::size_t patch) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t r = 0; r + patch <= side; ++r)
    for (std::size_t c = 0; c + patch <= side; ++c) {
      std::vector<std::size_t> s;
      for (std::size_t i = 0; i < patch; ++i)
        for (std::size_t j = 0; j < patch; ++j) s.push_back((r + i) * side + (c + j));
      out.push_back(s);
    }
  return out;
}

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> n;
  std::vector<double> v(d);
  for (auto& x : v) x = n(rng);
  return v;
}

}  // namespace

TEST(GaussianKernel, ClosedForms) {
  GaussianKernel k(0.5);
  EXPECT_EQ(eval_gaussian(k, std::vector<double>{0.0, 0.0, 0.0}), 1.0);
  EXPECT_NEAR(eval_gaussian(k, std::vector<double>{0.6, 0.8}), 0.6065306597126334, 1e-15);
  EXPECT_NEAR(eval_gaussian(k, std::vector<double>{2.0, 0.0, 0.0}), 0.1353352832366127, 1e-15);
  EXPECT_DOUBLE_EQ(k.frequency_scale(), 1.0);
  EXPECT_DOUBLE_EQ(GaussianKernel(2.0).frequency_scale(), 2.0);
  EXPECT_NEAR(GaussianKernel(3.0).factor(0.5), std::exp(-0.75), 1e-15);
}

TEST(GaussianKernel, RejectsNonPositiveBandwidth) {
  EXPECT_THROW(GaussianKernel(0.0), ArgumentError);
  EXPECT_THROW(GaussianKernel(-1.0), ArgumentError);
}

TEST(GaussianKernel, PairFormAndMismatch) {
  GaussianKernel k(0.3);
  std::vector<double> x{1.0, 2.0}, y{0.5, -1.0};
  EXPECT_NEAR(k(x, y), std::exp(-0.3 * (0.25 + 9.0)), 1e-15);
  EXPECT_THROW(k(x, std::vector<double>{1.0}), ArgumentError);
}

TEST(AnovaKernel, SingletonsAtCoincidentPoints) {
  std::vector<std::vector<std::size_t>> s;
  for (std::size_t i = 0; i < 6; ++i) s.push_back({i});
  AnovaKernel k(6, s, GaussianKernel(0.5));
  std::vector<double> x{1, 2, 3, 4, 5, 6};
  EXPECT_EQ(eval_anova(k, x, x), 6.0);
}

TEST(AnovaKernel, FullSubsetIsGaussian) {
  AnovaKernel k(3, {{0, 1, 2}}, GaussianKernel(0.7));
  std::mt19937_64 rng(1);
  const auto x = random_vec(rng, 3), y = random_vec(rng, 3);
  std::vector<double> u{x[0] - y[0], x[1] - y[1], x[2] - y[2]};
  EXPECT_NEAR(eval_anova(k, x, y), eval_gaussian(GaussianKernel(0.7), u), 1e-15);
}

TEST(AnovaKernel, TwoPairsBruteForce) {
  const double gamma = 0.5;
  AnovaKernel k(4, {{0, 1}, {2, 3}}, GaussianKernel(gamma));
  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) {
    const auto x = random_vec(rng, 4), y = random_vec(rng, 4);
    auto f = [&](int i) { return std::exp(-gamma * (x[i] - y[i]) * (x[i] - y[i])); };
    EXPECT_NEAR(eval_anova(k, x, y), f(0) * f(1) + f(2) * f(3), 1e-15);
  }
}

TEST(AnovaKernel, Stats) {
  std::mt19937_64 rng(3);
  std::vector<std::vector<std::size_t>> s;
  for (int i = 0; i < 50; ++i) {
    std::set<std::size_t> pick;
    while (pick.size() < 5) pick.insert(rng() % 40);
    s.emplace_back(pick.begin(), pick.end());
  }
  const auto st = anova_stats(AnovaKernel(40, s, GaussianKernel()));
  EXPECT_EQ(st.rank, 5u);
  EXPECT_EQ(st.size, 50u);
  std::vector<std::size_t> deg(40, 0);
  for (const auto& S : s)
    for (auto i : S) ++deg[i];
  EXPECT_EQ(st.degree, *std::max_element(deg.begin(), deg.end()));

  const auto patches = image_patches(28, 5);
  const auto ps = anova_stats(AnovaKernel(784, patches, GaussianKernel()));
  EXPECT_EQ(ps.size, 576u);
  EXPECT_EQ(ps.rank, 25u);
  EXPECT_EQ(ps.degree, 25u);

  const auto one = anova_stats(AnovaKernel(1, {{0}}, GaussianKernel()));
  EXPECT_EQ(one.rank, 1u);
  EXPECT_EQ(one.degree, 1u);
  EXPECT_EQ(one.size, 1u);
}

TEST(AnovaKernel, Invariants) {
  AnovaKernel k(5, {{0, 1}, {1, 2, 3}, {4}, {0, 4}}, GaussianKernel(0.4));
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  for (int t = 0; t < 200; ++t) {
    auto x = random_vec(rng, 5), y = random_vec(rng, 5);
    const double v = eval_anova(k, x, y);
    EXPECT_EQ(v, eval_anova(k, y, x));
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 4.0);
    const double c = 10.0 * n(rng);
    for (auto& xi : x) xi += c;
    for (auto& yi : y) yi += c;
    EXPECT_NEAR(eval_anova(k, x, y), v, 1e-12);
  }
  std::vector<double> x{1, 2, 3, 4, 5};
  EXPECT_EQ(eval_anova(k, x, x), 4.0);
}

TEST(AnovaKernel, RejectsInvalidStructure) {
  EXPECT_THROW(AnovaKernel(3, {}, GaussianKernel()), ArgumentError);
  EXPECT_THROW(AnovaKernel(3, {{}}, GaussianKernel()), ArgumentError);
  EXPECT_THROW(AnovaKernel(3, {{0, 3}}, GaussianKernel()), ArgumentError);
  AnovaKernel k(3, {{0, 1}}, GaussianKernel());
  EXPECT_THROW(eval_anova(k, std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}), ArgumentError);
}

TEST(AnovaJson, OneBasedIndices) {
  const auto k = anova_from_json(R"({"d": 4, "gamma": 0.25, "subsets": [[1, 2], [3, 4]]})");
  EXPECT_EQ(k.dim(), 4u);
  EXPECT_EQ(k.base().gamma(), 0.25);
  ASSERT_EQ(k.subsets().size(), 2u);
  EXPECT_EQ(k.subsets()[0], (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(k.subsets()[1], (std::vector<std::size_t>{2, 3}));

  const auto back = anova_from_json(anova_to_json(k));
  EXPECT_EQ(back.subsets(), k.subsets());
  EXPECT_EQ(back.base().gamma(), 0.25);

  EXPECT_EQ(anova_from_json(R"({"d": 2, "subsets": [[1]]})").base().gamma(), 0.5);
}

TEST(AnovaJson, Errors) {
  EXPECT_THROW(anova_from_json(R"({"d": 4, "subsets": [[0, 1]]})"), Error);
  EXPECT_THROW(anova_from_json(R"({"d": 4, "subsets": [[5]]})"), Error);
  EXPECT_THROW(anova_from_json(R"({"subsets": [[1]]})"), Error);
  EXPECT_THROW(anova_from_json("not json"), Error);
}

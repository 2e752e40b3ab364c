#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "flatpoly/kernels.hpp"

namespace k = flatpoly::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

double naive_poly(const std::vector<double>& c, double s) {
  double v = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) v += c[i] * std::pow(s, static_cast<double>(i));
  return v;
}

}  // namespace

TEST(Kernels, ScalarMatchesNaiveLoops) {
  std::mt19937_64 rng(1);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 33u}) {
    const auto x = random_vec(rng, n);
    auto y = random_vec(rng, n);
    auto ref = y;
    for (std::size_t i = 0; i < n; ++i) ref[i] += 0.75 * x[i];
    k::scalar::axpy(0.75, x, y);
    for (std::size_t i = 0; i < n; ++i) EXPECT_DOUBLE_EQ(y[i], ref[i]);

    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d += x[i] * ref[i];
    EXPECT_NEAR(k::scalar::dot(x, ref), d, 1e-13 * (1.0 + std::abs(d)));
  }
}

TEST(Kernels, PolyGridMaxMatchesNaive) {
  std::mt19937_64 rng(2);
  for (int deg : {0, 1, 2, 5, 10, 15}) {
    const auto c = random_vec(rng, static_cast<std::size_t>(deg + 1));
    const std::size_t count = 1001;
    const double ds = 1.0 / (count - 1);
    double best = -INFINITY;
    for (std::size_t j = 0; j < count; ++j) best = std::max(best, naive_poly(c, ds * static_cast<double>(j)));
    EXPECT_NEAR(k::scalar::poly_grid_max(c, 0.0, ds, count), best, 1e-12);
    EXPECT_NEAR(k::poly_grid_max(c, 0.0, ds, count), best, 1e-12);
  }
  EXPECT_EQ(k::poly_grid_max(std::vector<double>{1.0}, 0.0, 0.1, 0), -INFINITY);
}

TEST(Kernels, PolyEvalMatchesNaive) {
  std::mt19937_64 rng(3);
  const auto c = random_vec(rng, 9);
  const auto s = random_vec(rng, 37, 0.0, 1.0);
  std::vector<double> out(s.size());
  k::poly_eval(c, s, out);
  for (std::size_t j = 0; j < s.size(); ++j) EXPECT_NEAR(out[j], naive_poly(c, s[j]), 1e-13);
}

TEST(Kernels, ActiveIsaIsAvailable) {
  EXPECT_TRUE(k::isa_available(k::Isa::Scalar));
  EXPECT_TRUE(k::isa_available(k::active_isa()));
  EXPECT_FALSE(k::isa_name(k::active_isa()).empty());
}

#if defined(FLATPOLY_HAVE_AVX2)
class Avx2Equivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!k::isa_available(k::Isa::Avx2)) GTEST_SKIP() << "CPU lacks AVX2/FMA";
  }
};

TEST_F(Avx2Equivalence, Axpy) {
  std::mt19937_64 rng(4);
  for (std::size_t n = 0; n < 70; ++n) {
    const auto x = random_vec(rng, n);
    auto y1 = random_vec(rng, n);
    auto y2 = y1;
    k::scalar::axpy(-1.25, x, y1);
    k::avx2::axpy(-1.25, x, y2);
    // FMA rounds once; the scalar path rounds twice.
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 4e-16 * (1.0 + std::abs(y1[i])));
  }
}

TEST_F(Avx2Equivalence, Dot) {
  std::mt19937_64 rng(5);
  for (std::size_t n = 0; n < 70; ++n) {
    const auto x = random_vec(rng, n);
    const auto y = random_vec(rng, n);
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) abs_sum += std::abs(x[i] * y[i]);
    EXPECT_NEAR(k::scalar::dot(x, y), k::avx2::dot(x, y), 1e-15 * (n + 1) * (1.0 + abs_sum));
  }
}

TEST_F(Avx2Equivalence, PolyGridMaxAndEval) {
  std::mt19937_64 rng(6);
  for (int deg = 0; deg <= 15; ++deg) {
    const auto c = random_vec(rng, static_cast<std::size_t>(deg + 1));
    for (std::size_t count : {1u, 3u, 4u, 5u, 1000u, 100001u}) {
      const double ds = count > 1 ? 1.0 / static_cast<double>(count - 1) : 0.0;
      EXPECT_NEAR(k::scalar::poly_grid_max(c, 0.0, ds, count), k::avx2::poly_grid_max(c, 0.0, ds, count), 1e-13);
    }
    const auto s = random_vec(rng, 53, 0.0, 1.0);
    std::vector<double> a(s.size()), b(s.size());
    k::scalar::poly_eval(c, s, a);
    k::avx2::poly_eval(c, s, b);
    for (std::size_t j = 0; j < s.size(); ++j) EXPECT_NEAR(a[j], b[j], 1e-13);
  }
}
#endif

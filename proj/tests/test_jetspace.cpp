#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "jetpat/jetspace.hpp"
#include "oracles.hpp"

using namespace jetpat;

namespace {

double max_abs_diff(const GrayImage& a, const GrayImage& b, std::size_t border = 0) {
  double d = 0;
  for (std::size_t y = border; y + border < a.height(); ++y)
    for (std::size_t x = border; x + border < a.width(); ++x) d = std::max(d, std::abs(a(x, y) - b(x, y)));
  return d;
}

}  // namespace

TEST(ComputeJet, ConstantImage) {
  GrayImage img(20, 17, 42.5);
  const auto jet = compute_jet(img, 1.0, 4);
  ASSERT_EQ(jet.channels.size(), 6u);
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x) {
      EXPECT_NEAR(jet.channels[0](x, y), 42.5, 1e-10);
      for (int l = 1; l < kJetSize; ++l) EXPECT_NEAR(jet.channels[l](x, y), 0.0, 1e-10);
    }
}

TEST(ComputeJet, RampHasPositiveConstantGradient) {
  GrayImage img(24, 24);
  for (std::size_t y = 0; y < 24; ++y)
    for (std::size_t x = 0; x < 24; ++x) img(x, y) = static_cast<double>(x);
  const auto jet = compute_jet(img, 1.0, 4);
  // Oracle: -sum u G'(u) / sum |G'(u)| over u in [-4, 4], from closed-form samples.
  double num = 0, l1 = 0;
  for (int u = -4; u <= 4; ++u) {
    num -= u * oracle::gaussian_derivative(1, 1.0, u);
    l1 += std::abs(oracle::gaussian_derivative(1, 1.0, u));
  }
  EXPECT_NEAR(num / l1, 1.3743407200743025, 1e-12);
  for (std::size_t y = 5; y < 19; ++y)
    for (std::size_t x = 5; x < 19; ++x) {
      const auto j = jet.at(x, y);
      EXPECT_NEAR(j[0], static_cast<double>(x), 1e-10);
      EXPECT_NEAR(j[1], 1.3743407200743025, 1e-10);
      EXPECT_NEAR(j[2], 0.0, 1e-8);
      EXPECT_NEAR(j[3], 0.0, 1e-8);
      EXPECT_NEAR(j[4], 0.0, 1e-8);
      EXPECT_NEAR(j[5], 0.0, 1e-8);
    }
}

TEST(ComputeJet, CurvatureSignMatchesSecondDerivative) {
  // I = y^2 is convex along y: channel (0,2) is positive in the interior.
  GrayImage img(24, 24);
  for (std::size_t y = 0; y < 24; ++y)
    for (std::size_t x = 0; x < 24; ++x) img(x, y) = 0.01 * static_cast<double>(y * y);
  const auto jet = compute_jet(img, 1.0, 4);
  for (std::size_t y = 6; y < 18; ++y) {
    EXPECT_GT(jet.channels[5](12, y), 0.0);
    EXPECT_NEAR(jet.channels[3](12, y), 0.0, 1e-10);
  }
}

TEST(ComputeJet, SeparableMatchesDenseCorrelation) {
  for (double sigma : {0.8, 1.0, 1.6}) {
    const int r = default_support_radius(sigma);
    const auto img = oracle::random_image(32, 32, 7 + static_cast<unsigned>(sigma * 10));
    const auto jet = compute_jet(img, sigma, r, false);
    for (int l = 0; l < kJetSize; ++l) {
      const auto [m, n] = kJetOrders[l];
      const double sign = (m + n) % 2 ? -1.0 : 1.0;
      const auto dense = oracle::correlate_dense(img, oracle::direct_kernel_2d(m, n, sigma, r), sign);
      EXPECT_LE(max_abs_diff(jet.channels[l], dense), 1e-10) << "channel " << l << " sigma " << sigma;
    }
  }
}

TEST(ComputeJet, IntensityAdditionShiftsOnlyZerothChannel) {
  const auto img = oracle::random_image(32, 28, 3);
  GrayImage shifted = img;
  for (double& v : shifted.pixels()) v += 37.25;
  const auto a = compute_jet(img, 1.0, 4);
  const auto b = compute_jet(shifted, 1.0, 4);
  for (std::size_t i = 0; i < img.size(); ++i) {
    EXPECT_NEAR(b.channels[0].data()[i] - a.channels[0].data()[i], 37.25, 1e-10);
    for (int l = 1; l < kJetSize; ++l) EXPECT_NEAR(b.channels[l].data()[i], a.channels[l].data()[i], 1e-10);
  }
}

TEST(ComputeJet, PositiveScalingIsLinear) {
  const auto img = oracle::random_image(30, 30, 4);
  for (double eps : {0.25, 3.0}) {
    GrayImage scaled = img;
    for (double& v : scaled.pixels()) v *= eps;
    const auto a = compute_jet(img, 1.3, 6);
    const auto b = compute_jet(scaled, 1.3, 6);
    for (int l = 0; l < kJetSize; ++l)
      for (std::size_t i = 0; i < img.size(); ++i)
        EXPECT_NEAR(b.channels[l].data()[i], eps * a.channels[l].data()[i], 1e-10);
  }
}

TEST(ComputeJet, RotationBy90IsEquivariantOnInterior) {
  const int r = 4;
  const auto img = oracle::random_image(31, 26, 5);
  const auto rot = oracle::rotate90(img);
  const auto a = compute_jet(img, 1.0, r);
  const auto b = compute_jet(rot, 1.0, r);
  const std::size_t border = r + 1;
  double worst = 0;
  for (std::size_t y = border; y + border < img.height(); ++y)
    for (std::size_t x = border; x + border < img.width(); ++x) {
      const auto expect = rotate_jet(a.at(x, y), std::numbers::pi / 2);
      const auto got = b.at(img.height() - 1 - y, x);
      for (int l = 0; l < kJetSize; ++l) worst = std::max(worst, std::abs(got[l] - expect[l]));
    }
  EXPECT_LE(worst, 1e-6);
}

TEST(ComputeJet, TransposeIsReflection) {
  const int r = 5;
  const auto img = oracle::random_image(27, 33, 6);
  const auto tr = oracle::transpose(img);
  const auto a = compute_jet(img, 1.2, r);
  const auto b = compute_jet(tr, 1.2, r);
  for (std::size_t y = r + 1; y + r + 1 < img.height(); ++y)
    for (std::size_t x = r + 1; x + r + 1 < img.width(); ++x) {
      const auto expect = reflect_jet(a.at(x, y));
      const auto got = b.at(y, x);
      for (int l = 0; l < kJetSize; ++l) EXPECT_NEAR(got[l], expect[l], 1e-10);
    }
}

TEST(ComputeJet, ScaleNormalization) {
  const auto img = oracle::random_image(24, 24, 8);
  const auto n1 = compute_jet(img, 1.0, 4, true);
  const auto u1 = compute_jet(img, 1.0, 4, false);
  EXPECT_TRUE(n1.normalized);
  EXPECT_FALSE(u1.normalized);
  for (int l = 0; l < kJetSize; ++l) EXPECT_EQ(n1.channels[l], u1.channels[l]);

  const double sigma = 1.5;
  const auto n = compute_jet(img, sigma, 6, true);
  const auto u = compute_jet(img, sigma, 6, false);
  for (int l = 0; l < kJetSize; ++l) {
    const double s = std::pow(sigma, kJetOrders[l].total());
    for (std::size_t i = 0; i < img.size(); ++i)
      EXPECT_NEAR(n.channels[l].data()[i], s * u.channels[l].data()[i], 1e-12);
  }
}

TEST(ComputeJet, DefaultSupportRadiusOverload) {
  const auto img = oracle::random_image(30, 30, 9);
  const auto a = compute_jet(img, 1.6);
  const auto b = compute_jet(img, 1.6, 7);
  for (int l = 0; l < kJetSize; ++l) EXPECT_EQ(a.channels[l], b.channels[l]);
}

TEST(ComputeJet, RejectsTooSmallImage) {
  EXPECT_THROW(compute_jet(GrayImage(10, 11), 1.0, 4), std::invalid_argument);
  EXPECT_THROW(compute_jet(GrayImage(11, 10), 1.0, 4), std::invalid_argument);
  EXPECT_NO_THROW(compute_jet(GrayImage(11, 11), 1.0, 4));
}

TEST(ContrastNormalize, ZeroJetStaysZero) {
  JetVector jet;
  for (auto& c : jet.channels) c = GrayImage(12, 12, 0.0);
  const auto out = contrast_normalize(jet);
  for (const auto& c : out.channels)
    for (double v : c.pixels()) EXPECT_EQ(v, 0.0);
}

TEST(ContrastNormalize, WeberMultiplierAtThreshold) {
  // L = 0.03 with components (0.018, 0.024, 0, 0, 0, 0); multiplier log(2)/0.03.
  JetVector jet;
  for (auto& c : jet.channels) c = GrayImage(1, 1, 0.0);
  jet.channels[1](0, 0) = 0.018;
  jet.channels[4](0, 0) = 0.024;
  const auto out = contrast_normalize(jet);
  const double k = std::log(2.0) / 0.03;
  EXPECT_NEAR(k, 23.104906018664844, 1e-12);
  EXPECT_NEAR(out.channels[1](0, 0), 0.018 * k, 1e-12);
  EXPECT_NEAR(out.channels[4](0, 0), 0.024 * k, 1e-12);
  EXPECT_EQ(out.channels[0](0, 0), 0.0);
}

TEST(ContrastNormalize, PreservesDirection) {
  const auto jet = compute_jet(oracle::random_image(20, 20, 10), 1.0, 4);
  const auto out = contrast_normalize(jet);
  for (std::size_t y = 0; y < 20; ++y)
    for (std::size_t x = 0; x < 20; ++x) {
      const auto a = jet.at(x, y), b = out.at(x, y);
      double la = 0, lb = 0;
      for (int l = 0; l < kJetSize; ++l) la += a[l] * a[l], lb += b[l] * b[l];
      la = std::sqrt(la), lb = std::sqrt(lb);
      EXPECT_NEAR(lb, std::log1p(la / kWeberConstant), 1e-9);
      const double k = lb / la;
      EXPECT_GT(k, 0.0);
      for (int l = 0; l < kJetSize; ++l) EXPECT_NEAR(b[l], k * a[l], 1e-9 * std::max(1.0, std::abs(b[l])));
    }
}

TEST(ContrastNormalize, RejectsNonPositiveConstant) {
  JetVector jet;
  for (auto& c : jet.channels) c = GrayImage(1, 1, 1.0);
  EXPECT_THROW(contrast_normalize(jet, 0.0), std::invalid_argument);
}

TEST(RotateJet, Examples) {
  const Jet6 j{1.5, 0.3, -0.7, 2.0, 0.4, -1.1};
  const auto id = rotate_jet(j, 0.0);
  for (int l = 0; l < kJetSize; ++l) EXPECT_NEAR(id[l], j[l], 1e-15);
  const auto half = rotate_jet(j, std::numbers::pi);
  EXPECT_NEAR(half[0], j[0], 1e-15);
  EXPECT_NEAR(half[1], -j[1], 1e-15);
  EXPECT_NEAR(half[2], -j[2], 1e-15);
  for (int l = 3; l < kJetSize; ++l) EXPECT_NEAR(half[l], j[l], 1e-14);
}

TEST(RotateJet, MatchesHessianConjugation) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int t = 0; t < 50; ++t) {
    const Jet6 j{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
    const double th = u(rng);
    const double c = std::cos(th), s = std::sin(th);
    const double rm[2][2] = {{c, -s}, {s, c}};
    const double h[2][2] = {{j[3], j[4]}, {j[4], j[5]}};
    double rh[2][2] = {}, out[2][2] = {};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int k = 0; k < 2; ++k) rh[a][b] += rm[a][k] * h[k][b];
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int k = 0; k < 2; ++k) out[a][b] += rh[a][k] * rm[b][k];
    const auto r = rotate_jet(j, th);
    EXPECT_NEAR(r[1], c * j[1] - s * j[2], 1e-12);
    EXPECT_NEAR(r[2], s * j[1] + c * j[2], 1e-12);
    EXPECT_NEAR(r[3], out[0][0], 1e-12);
    EXPECT_NEAR(r[4], out[0][1], 1e-12);
    EXPECT_NEAR(r[5], out[1][1], 1e-12);
  }
}

TEST(ReflectJet, Examples) {
  const Jet6 j{1, 2, 3, 4, 5, 6};
  EXPECT_EQ(reflect_jet(j), (Jet6{1, 3, 2, 6, 5, 4}));
  const Jet6 sym{1, 2, 2, 4, 5, 4};
  EXPECT_EQ(reflect_jet(sym), sym);
  EXPECT_EQ(reflect_jet(reflect_jet(j)), j);
}

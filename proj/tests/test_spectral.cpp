#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "eprsq/elements.hpp"
#include "eprsq/errors.hpp"
#include "eprsq/spectral.hpp"
#include "oracles.hpp"

using namespace eprsq;

namespace {

Mat4 random_mat(std::mt19937_64& g) {
  Mat4 m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = Complex(oracle::uniform(g, -1, 1), oracle::uniform(g, -1, 1));
  return m;
}

}  // namespace

TEST(FrequencyGrid, LogEndpointsAndMidpoint) {
  const FrequencyGrid g = make_grid(1e5, 1e7, 3, GridScale::Logarithmic);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_DOUBLE_EQ(g.frequency_hz(0), 1e5);
  EXPECT_NEAR(g.frequency_hz(1), 1e6, 1e-6);
  EXPECT_DOUBLE_EQ(g.frequency_hz(2), 1e7);
  EXPECT_DOUBLE_EQ(g.omega(0), kTwoPi * 1e5);
}

TEST(FrequencyGrid, LinearEndpoints) {
  const FrequencyGrid g = make_grid(2e5, 3e5, 2, GridScale::Linear);
  EXPECT_DOUBLE_EQ(g.frequency_hz(0), 2e5);
  EXPECT_DOUBLE_EQ(g.frequency_hz(1), 3e5);
  EXPECT_EQ(g.scale(), GridScale::Linear);
}

TEST(FrequencyGrid, RejectsDegenerateBounds) {
  EXPECT_THROW(make_grid(1e5, 1e5, 2, GridScale::Linear), Error);
  EXPECT_THROW(make_grid(2e5, 1e5, 4, GridScale::Logarithmic), Error);
  EXPECT_THROW(make_grid(0.0, 1e5, 4, GridScale::Logarithmic), Error);
  EXPECT_THROW(make_grid(1e5, 2e5, 1, GridScale::Linear), Error);
  try {
    make_grid(-1.0, 1e5, 4, GridScale::Linear);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
  }
}

TEST(FrequencyGrid, RejectsUnorderedPoints) {
  EXPECT_THROW(FrequencyGrid({1.0, 1.0}, GridScale::Linear), Error);
  EXPECT_THROW(FrequencyGrid({2.0, 1.0}, GridScale::Linear), Error);
  EXPECT_THROW(FrequencyGrid({1.0}, GridScale::Linear), Error);
}

TEST(FrequencyGrid, ParseScale) {
  EXPECT_EQ(parse_grid_scale("log"), GridScale::Logarithmic);
  EXPECT_EQ(parse_grid_scale("linear"), GridScale::Linear);
  EXPECT_THROW(parse_grid_scale("cubic"), Error);
}

TEST(QuadratureBasis, InverseIsExact) {
  const Mat4 p = quadrature_basis() * quadrature_basis_inverse();
  EXPECT_LT((p - Mat4::Identity()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(QuadratureTransfer, RejectsSizeMismatchAndNonFinite) {
  const FrequencyGrid g = make_grid(1, 10, 3, GridScale::Linear);
  try {
    QuadratureTransfer(g, std::vector<Mat4>(2, Mat4::Identity()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InconsistentState);
  }
  std::vector<Mat4> bad(3, Mat4::Identity());
  bad[1](0, 0) = Complex(std::nan(""), 0);
  EXPECT_THROW(QuadratureTransfer(g, bad), Error);
}

TEST(NoisePortSet, RejectsDuplicatesAndForeignGrids) {
  const FrequencyGrid g = make_grid(1, 10, 3, GridScale::Linear);
  const FrequencyGrid h = make_grid(1, 20, 3, GridScale::Linear);
  NoisePortSet set(g);
  set.add("a", QuadratureTransfer::identity(g));
  EXPECT_TRUE(set.contains("a"));
  EXPECT_EQ(set.find("b"), nullptr);
  EXPECT_THROW(set.add("a", QuadratureTransfer::identity(g)), Error);
  try {
    set.add("b", QuadratureTransfer::identity(h));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InconsistentState);
  }
}

TEST(Covariance, IdentityPortGivesVacuum) {
  const FrequencyGrid g = make_grid(1e3, 1e8, 20, GridScale::Logarithmic);
  NoisePortSet set(g);
  set.add("vac", QuadratureTransfer::identity(g));
  const SpectralCovariance s = covariance_from_ports(set);
  for (const Mat4& m : s.matrices()) EXPECT_LT((m - Mat4::Identity()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Covariance, EmptySetIsRejected) {
  const FrequencyGrid g = make_grid(1, 10, 3, GridScale::Linear);
  EXPECT_THROW(covariance_from_ports(NoisePortSet(g)), Error);
}

TEST(Covariance, UnpumpedOpoIsVacuum) {
  const FrequencyGrid g = make_grid(1e3, 1e8, 30, GridScale::Logarithmic);
  const OpoParams p = OpoParams::from_linewidth(0.0, 1.3, kTwoPi * 12.1e6, 0.8);
  const SpectralCovariance s = covariance_from_ports(opo_ports(p, g));
  for (const Mat4& m : s.matrices()) EXPECT_LT((m - Mat4::Identity()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Covariance, OpoDiagonalMatchesOutputOracle) {
  const FrequencyGrid g({1e-9, 1.0}, GridScale::Linear);
  const OpoParams p{0.5, 0.0, 1.0, 0.0};
  const SpectralCovariance s = covariance_from_ports(opo_ports(p, g));
  EXPECT_NEAR(s.at(0)(0, 0).real(), 41.0 / 9.0, 1e-9);
  EXPECT_NEAR(s.at(0)(1, 1).real(), 41.0 / 9.0, 1e-9);
  EXPECT_NEAR(s.at(1)(0, 0).real(), oracle::v_out(0.5, 1.0, 1.0), 1e-12);
}

TEST(Covariance, HermitianAndPositiveForRandomPorts) {
  auto rng = oracle::rng(11);
  const FrequencyGrid g = make_grid(1, 100, 10, GridScale::Logarithmic);
  NoisePortSet set(g);
  for (int k = 0; k < 4; ++k) {
    std::vector<Mat4> ms;
    for (std::size_t i = 0; i < g.size(); ++i) ms.push_back(random_mat(rng));
    set.add("p" + std::to_string(k), QuadratureTransfer(g, ms));
  }
  const SpectralCovariance s = covariance_from_ports(set);
  for (const Mat4& m : s.matrices()) {
    EXPECT_LT((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat4> es(m);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(Covariance, LosslessPassiveNetworkIsVacuum) {
  const FrequencyGrid g = make_grid(1e4, 1e8, 40, GridScale::Logarithmic);
  const OpoParams opo{0.0, 0.7, kTwoPi * 12.1e6, 0.0};
  NoisePortSet net = opo_ports(opo, g);
  net = compose(net, cavity_ports(CavityParams{kTwoPi * 1.25e6, 1.0, 0.8, -0.3}, g));
  net = compose(net, loss_ports(LossChannel{1.0, 1.0}, g));
  net = compose(net, phase_shift(0.4, -1.1, g), NoisePortSet(g));
  EXPECT_EQ(net.size(), 1u);
  const SpectralCovariance s = covariance_from_ports(net);
  for (const Mat4& m : s.matrices()) EXPECT_LT((m - Mat4::Identity()).cwiseAbs().maxCoeff(), 1e-10);
}

#include "ppfso3/errors.hpp"
#include "ppfso3/ppf.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ppfso3;

namespace {

// Independent oracles written directly from the closed forms.
double oracle_xi(double xi0, double xi_inf, double ell, double t) {
  return (xi0 - xi_inf) * std::exp(-ell * t) + xi_inf;
}

double oracle_E(double r, double dl, double db) { return 0.5 * std::log((dl + r) / (db - r)); }

}  // namespace

TEST(Envelope, DefaultValues) {
  const PpfParams p;
  EXPECT_DOUBLE_EQ(xi(p, 0.0), 1.2);
  EXPECT_NEAR(xi(p, 1.0), oracle_xi(1.2, 0.05, 3.0, 1.0), 1e-15);
  EXPECT_NEAR(xi(p, 1.0), 0.10725512866, 1e-10);
  EXPECT_NEAR(xi(p, 100.0), 0.05, 1e-15);
  EXPECT_NEAR(xi_dot(p, 0.0), -3.45, 1e-15);
  EXPECT_NEAR(envelope_upper(p, 0.0), 1.44, 1e-15);
  EXPECT_NEAR(envelope_lower(p, 0.0), -1.44, 1e-15);
}

TEST(Envelope, FlatEnvelopeAllowed) {
  PpfParams p;
  p.xi0 = p.xi_inf = 0.3;
  EXPECT_NO_THROW(p.validate());
  EXPECT_DOUBLE_EQ(xi(p, 5.0), 0.3);
  EXPECT_DOUBLE_EQ(xi_dot(p, 5.0), 0.0);
}

TEST(Envelope, MonotoneAndDerivativeConsistent) {
  const PpfParams p;
  double prev = xi(p, 0.0);
  for (double t = 0.01; t < 10.0; t += 0.01) {
    const double x = xi(p, t);
    EXPECT_LE(x, prev);
    EXPECT_GE(x, p.xi_inf);
    const double h = 1e-6;
    EXPECT_NEAR(xi_dot(p, t), (xi(p, t + h) - xi(p, t - h)) / (2 * h), 1e-7);
    prev = x;
  }
}

TEST(PpfParams, Validation) {
  auto bad = [](auto mutate) {
    PpfParams p;
    mutate(p);
    try {
      p.validate();
      return false;
    } catch (const Error& e) {
      return e.kind() == ErrorKind::InvalidParams;
    }
  };
  EXPECT_TRUE(bad([](PpfParams& p) { p.xi0 = 0.01; }));
  EXPECT_TRUE(bad([](PpfParams& p) { p.xi_inf = 0.0; }));
  EXPECT_TRUE(bad([](PpfParams& p) { p.ell = 0.0; }));
  EXPECT_TRUE(bad([](PpfParams& p) { p.delta_under = 0.0; }));
  EXPECT_TRUE(bad([](PpfParams& p) { p.delta_under = 2.0; }));
  EXPECT_NO_THROW(PpfParams{}.validate());
}

TEST(Transform, KnownValues) {
  const PpfParams p;
  const auto zero = transform(p, 0.0, 1.2);
  EXPECT_DOUBLE_EQ(zero.value, 0.0);
  // 1 / 2.4 * (1 / 1.2 + 1 / 1.2)
  EXPECT_NEAR(zero.mu, 0.69444444444444442, 1e-15);
  const auto r = transform(p, 0.6, 1.0);
  EXPECT_NEAR(r.value, oracle_E(0.6, 1.2, 1.2), 1e-15);
  EXPECT_NEAR(r.value, 0.54930614433405489, 1e-14);
}

TEST(Transform, MuIsDerivativeOfE) {
  const PpfParams p;
  for (double x : {0.05, 0.2, 1.0}) {
    for (double r = -1.1; r < 1.15; r += 0.05) {
      const double e = r * x;
      const double h = 1e-7 * x;
      const double fd = (transform(p, e + h, x).value - transform(p, e - h, x).value) / (2 * h);
      const double mu = transform(p, e, x).mu;
      EXPECT_GT(mu, 0.0);
      EXPECT_LT(std::abs(mu - fd) / mu, 1e-6) << "e=" << e << " xi=" << x;
    }
  }
}

TEST(Transform, ZIsInverse) {
  const PpfParams p;
  EXPECT_NEAR(z_of(p, 0.5 * std::log(3.0)), 0.6, 1e-15);
  for (double r = -1.19; r < 1.2; r += 0.01) {
    EXPECT_NEAR(z_of(p, transform(p, r, 1.0).value), r, 1e-12);
  }
  for (double E = -15.0; E <= 15.0; E += 0.5) {
    const double z = z_of(p, E);
    EXPECT_GT(z, -p.delta_under);
    EXPECT_LT(z, p.delta_bar);
  }
}

TEST(Transform, ViolationCarriesContext) {
  const PpfParams p;
  try {
    transform(p, 0.5, 0.4, 2.5);
    FAIL() << "expected EnvelopeViolation";
  } catch (const EnvelopeViolationError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EnvelopeViolation);
    EXPECT_DOUBLE_EQ(e.error_value(), 0.5);
    EXPECT_DOUBLE_EQ(e.xi(), 0.4);
    EXPECT_DOUBLE_EQ(e.t(), 2.5);
  }
  EXPECT_THROW(transform(p, 1.2 * 0.4, 0.4), EnvelopeViolationError);
  EXPECT_THROW(transform(p, -1.2 * 0.4, 0.4), EnvelopeViolationError);
  EXPECT_THROW(transform(p, NAN, 0.4), Error);
}

TEST(Transform, ClampedVariant) {
  const PpfParams p;
  const auto inside = transform_clamped(p, 0.1, 0.4);
  EXPECT_FALSE(inside.clamped);
  EXPECT_DOUBLE_EQ(inside.te.value, transform(p, 0.1, 0.4).value);
  const auto out = transform_clamped(p, 1.0, 0.4);
  EXPECT_TRUE(out.clamped);
  EXPECT_TRUE(std::isfinite(out.te.value));
  EXPECT_TRUE(std::isfinite(out.te.mu));
  EXPECT_NEAR(out.te.value, oracle_E(1.2 - 1e-9, 1.2, 1.2), 1e-9);
  const auto low = transform_clamped(p, -1.0, 0.4);
  EXPECT_TRUE(low.clamped);
  EXPECT_LT(low.te.value, 0.0);
}

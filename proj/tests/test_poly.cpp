#include <gtest/gtest.h>

#include <algorithm>
#include <complex>
#include <random>

#include "carma_hf/poly.hpp"
#include "oracles.hpp"

using namespace carma_hf;
using cd = std::complex<double>;

TEST(Polynomial, TrimsTrailingZeros) {
  const Polynomial p{2.0, 3.0, 0.0, 0.0};
  EXPECT_EQ(p.degree(), 1);
  EXPECT_EQ(p.leading(), 3.0);
  EXPECT_TRUE(Polynomial({0.0, 0.0}).is_zero());
  EXPECT_EQ(Polynomial({0.0, 0.0}).degree(), 0);
}

TEST(Polynomial, EvalExamples) {
  const Polynomial a{2.0, 3.0, 1.0};  // z^2 + 3z + 2
  EXPECT_EQ(eval(a, cd(-1.0, 0.0)), cd(0.0, 0.0));
  EXPECT_EQ(eval(Polynomial{1.0}, cd(7.5, -2.0)), cd(1.0, 0.0));
  const cd at_i = eval(a, cd(0.0, 1.0));
  EXPECT_DOUBLE_EQ(at_i.real(), 1.0);
  EXPECT_DOUBLE_EQ(at_i.imag(), 3.0);
}

TEST(Polynomial, DerivativeExamples) {
  EXPECT_EQ(derivative(Polynomial{2.0, 3.0, 1.0}), (Polynomial{3.0, 2.0}));
  EXPECT_TRUE(derivative(Polynomial{5.0}).is_zero());
  EXPECT_EQ(derivative(Polynomial{1.0, 0.0, 0.0, 1.0}), (Polynomial{0.0, 0.0, 3.0}));
}

TEST(Polynomial, MultiplyAndFromRoots) {
  EXPECT_EQ(multiply(Polynomial{1.0, 1.0}, Polynomial{2.0, 1.0}), (Polynomial{2.0, 3.0, 1.0}));
  const std::vector<cd> roots{cd(-1, 2), cd(-1, -2)};
  EXPECT_EQ(monic_from_roots<double>(roots), (Polynomial{5.0, 2.0, 1.0}));
}

TEST(FindRoots, Factorable) {
  const auto r = find_roots(Polynomial{2.0, 3.0, 1.0});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r[0].value.real(), -1.0, 1e-14);
  EXPECT_EQ(r[0].value.imag(), 0.0);
  EXPECT_EQ(r[0].multiplicity, 1);
  EXPECT_NEAR(r[1].value.real(), -2.0, 1e-14);
  EXPECT_EQ(r[1].multiplicity, 1);
}

TEST(FindRoots, PerfectSquare) {
  const auto r = find_roots(Polynomial{1.0, 2.0, 1.0});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r[0].value.real(), -1.0, 1e-12);
  EXPECT_EQ(r[0].multiplicity, 2);
}

TEST(FindRoots, ComplexPair) {
  const auto r = find_roots(Polynomial{5.0, 2.0, 1.0});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(std::abs(r[0].value - cd(-1, 2)), 0.0, 1e-14);
  EXPECT_EQ(r[1].value, std::conj(r[0].value));
}

TEST(FindRoots, DegreeZeroRejected) {
  EXPECT_THROW(find_roots(Polynomial{3.0}), Error);
}

TEST(FindRoots, NonConvergenceCarriesBestIterate) {
  RootFinderOptions opts;
  opts.max_iterations = 1;
  try {
    find_roots(Polynomial{-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0}, opts);
    FAIL() << "expected non_convergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_convergence);
    EXPECT_NE(std::string(e.what()).find("best iterate"), std::string::npos);
  }
}

TEST(FindRoots, RandomStableRootsRecovered) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    const int degree = 1 + trial % 6;
    const auto roots = carma_hf::testing::random_stable_roots(rng, degree);
    const Polynomial poly(carma_hf::testing::real_poly_from_roots(roots));
    const auto found = find_roots(poly);
    EXPECT_EQ(found.total_multiplicity(), degree);
    for (const auto& r : roots) {
      double best = 1e300;
      for (const auto& f : found) best = std::min(best, std::abs(f.value - r));
      EXPECT_LT(best, 1e-8) << "trial " << trial;
    }
    for (const auto& f : found) {
      const double scale = 1 + std::pow(std::abs(f.value), degree);
      EXPECT_LE(std::abs(eval(poly, f.value)) / scale, 1e-10);
    }
  }
}

TEST(FindRoots, RandomMultiplicitiesRecovered) {
  // Exactly representable roots keep the coefficients exact, so a repeated
  // root is repeated in the input polynomial too.
  const std::vector<double> pool{-0.5, -1.0, -1.5, -2.0, -3.0};
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> chosen = pool;
    std::shuffle(chosen.begin(), chosen.end(), rng);
    std::vector<std::pair<double, int>> spec;
    int degree = 0;
    for (double r : chosen) {
      const int room = 6 - degree;
      if (room == 0) break;
      const int m = 1 + static_cast<int>(rng() % static_cast<unsigned>(std::min(3, room)));
      spec.push_back({r, m});
      degree += m;
      if (rng() % 3 == 0) break;
    }
    std::vector<cd> roots;
    for (auto [r, m] : spec) roots.insert(roots.end(), static_cast<std::size_t>(m), cd(r));
    const auto found = find_roots(Polynomial(carma_hf::testing::real_poly_from_roots(roots)));
    ASSERT_EQ(found.size(), spec.size()) << "trial " << trial;
    for (auto [r, m] : spec) {
      const auto it = std::find_if(found.begin(), found.end(), [&](const auto& f) { return std::abs(f.value - r) < 1e-8; });
      ASSERT_NE(it, found.end()) << "trial " << trial << " root " << r;
      EXPECT_EQ(it->multiplicity, m);
    }
  }
}

TEST(FindRoots, ConjugateClosureIsExact) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto roots = carma_hf::testing::random_stable_roots(rng, 2 + trial % 5);
    const auto found = find_roots(Polynomial(carma_hf::testing::real_poly_from_roots(roots)));
    for (const auto& f : found) {
      if (f.value.imag() == 0.0) continue;
      const auto it = std::find_if(found.begin(), found.end(), [&](const auto& g) { return g.value == std::conj(f.value); });
      ASSERT_NE(it, found.end());
      EXPECT_EQ(it->multiplicity, f.multiplicity);
    }
  }
}

TEST(Stability, Examples) {
  EXPECT_TRUE(is_stable(RootSet({{cd(-1), 1}, {cd(-2), 1}})));
  EXPECT_FALSE(is_stable(RootSet({{cd(0.5), 1}})));
  EXPECT_FALSE(is_stable(RootSet({{cd(0.0), 1}})));
  EXPECT_FALSE(is_stable(RootSet({{cd(-1e-13), 1}})));
}

TEST(Coprime, Examples) {
  const Polynomial a{2.0, 3.0, 1.0};
  EXPECT_FALSE(coprime(a, Polynomial{1.0, 1.0}));
  EXPECT_TRUE(coprime(a, Polynomial{5.0, 1.0}));
  EXPECT_TRUE(coprime(Polynomial{1.0, 1.0}, Polynomial{1.0}));
}

#include <doctest.h>

#include <cmath>

#include <mapkit/closed_forms.hpp>
#include <mapkit/grid.hpp>
#include <mapkit/linalg.hpp>
#include <mapkit/metrics.hpp>
#include <mapkit/rng.hpp>

#include "helpers.hpp"

using mapkit::Matrix;
using mapkit::Mmpp2Params;
using mapkit::RowVector;
using mapkit::Vector;

TEST_CASE("two-phase closed forms: canonical and generic frozen values") {
  const auto canonical = mapkit::mmpp2_metrics({1.0, 3.0, 1.0, 1.0});
  CHECK(canonical.c2 == doctest::Approx(9.0 / 7.0).epsilon(1e-15));
  CHECK(canonical.d2 == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(canonical.rate_sum == 6.0);
  CHECK(canonical.rate_mix == 7.0);

  const auto generic = mapkit::mmpp2_metrics({0.4, 2.2, 0.7, 1.3});
  CHECK(generic.c2 == doctest::Approx(1.5014285714285713).epsilon(1e-15));
  CHECK(generic.d2 == doctest::Approx(1.7156310679611653).epsilon(1e-15));
}

TEST_CASE("two-phase closed forms agree with the matrix pipeline") {
  mapkit::SplitRng rng(20240819);
  const auto ts = mapkit::TimeGrid{0.0, 8.0, 0.5}.points();
  for (int trial = 0; trial < 25; ++trial) {
    const Mmpp2Params p{rng.next_uniform(0.05, 5.0),
                        rng.next_uniform(0.05, 5.0),
                        rng.next_uniform(0.05, 4.0),
                        rng.next_uniform(0.05, 4.0)};
    CAPTURE(p.lambda1);
    CAPTURE(p.lambda2);
    CAPTURE(p.sigma1);
    CAPTURE(p.sigma2);

    const auto ch = mapkit::mmpp2_metrics(p);
    const auto m = mapkit::mmpp2_model(p);
    const auto sp = mapkit::stationary_pair(m);

    CHECK(mapkit::scv(m) == doctest::Approx(ch.c2).epsilon(1e-10));
    CHECK(mapkit::dispersion_index(m) == doctest::Approx(ch.d2).epsilon(1e-10));

    // Ordering gap: explicit exponentials vs (pi - alpha) e^{Ct} 1.
    const auto gap = mapkit::stochastic_order_gap(m, sp, ts);
    for (std::size_t k = 0; k < ts.size(); ++k) {
      CHECK(gap.values[k] ==
            doctest::Approx(ch.gap(ts[k])).epsilon(1e-9).scale(1.0));
    }

    // Hazard-slope expression: explicit e^{-Bt} form vs the quadratic form
    // (alpha C e^{Ct} D 1)(alpha e^{Ct} 1) + (alpha C e^{Ct} 1)^2.
    const Vector w = m.D() * Vector::Ones(2);
    const RowVector alpha_c = sp.alpha.row() * m.C();
    for (double t : {0.0, 0.3, 1.0, 2.5}) {
      const Matrix Et = mapkit::expm(m.C(), t);
      const RowVector srow = sp.alpha.row() * Et;
      const RowVector arow = alpha_c * Et;
      const double aw = arow * w;
      const double asum = arow.sum();
      const double quad = aw * srow.sum() + asum * asum;
      CHECK(quad == doctest::Approx(ch.hazard_condition(t))
                        .epsilon(1e-9)
                        .scale(std::abs(ch.dhr_factor)));
      CHECK(ch.hazard_condition(t) <= 0.0);
    }
  }
}

TEST_CASE("equal event rates degenerate to the memoryless process") {
  const auto ch = mapkit::mmpp2_metrics({2.0, 2.0, 0.5, 1.5});
  CHECK(ch.c2 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ch.d2 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ch.dhr_factor == doctest::Approx(0.0));
  CHECK(ch.gap_coef == doctest::Approx(0.0));
  CHECK(ch.gap(3.0) == doctest::Approx(0.0));
  CHECK(ch.hazard_condition(3.0) == doctest::Approx(0.0));

  const auto m = mapkit::mmpp2_model({2.0, 2.0, 0.5, 1.5});
  CHECK(mapkit::scv(m) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mapkit::dispersion_index(m) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two-phase parameter validation") {
  CHECK_THROWS_AS((void)mapkit::mmpp2_metrics({1.0, 1.0, 0.0, 1.0}),
                  mapkit::validation_error);
  CHECK_THROWS_AS((void)mapkit::mmpp2_metrics({-1.0, 1.0, 1.0, 1.0}),
                  mapkit::validation_error);
  CHECK_THROWS_AS((void)mapkit::mmpp2_metrics({0.0, 0.0, 1.0, 1.0}),
                  mapkit::validation_error);
  const auto nan = std::nan("");
  CHECK_THROWS_AS((void)mapkit::mmpp2_metrics({nan, 1.0, 1.0, 1.0}),
                  mapkit::validation_error);
  CHECK_THROWS_AS((void)mapkit::mmpp2_metrics({1.0, 2.0, 1.0, 1.0})
                      .hazard_condition(-1.0),
                  mapkit::validation_error);
  // One-sided event rates are legal (a phase may be silent).
  const auto silent = mapkit::mmpp2_metrics({0.0, 2.0, 1.0, 1.0});
  CHECK(silent.c2 > 1.0);
}

TEST_CASE("scv bracket for diagonal-C models: frozen endpoint values") {
  // Two phases with total rates 1 and 4: kappa = 2.5, gamma = 2,
  // upper = 2 * 6.25 / 4 - 1 = 2.125.
  Matrix C(2, 2), D(2, 2);
  C << -1.0, 0.0, 0.0, -4.0;
  D << 0.5, 0.5, 2.0, 2.0;
  const auto m = mapkit::validate_model(C, D);
  const auto b = mapkit::mspp_scv_bounds(m);
  CHECK(b.lower == 1.0);
  CHECK(b.kappa == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(b.gamma == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(b.upper == doctest::Approx(2.125).epsilon(1e-15));
  const double c2 = mapkit::scv(m);
  CHECK(c2 >= b.lower - 1e-12);
  CHECK(c2 <= b.upper + 1e-12);

  // Rates 1 and 9: kappa = 5, gamma = 3, upper = 50/9 - 1 = 41/9.
  Matrix C2(2, 2), D2(2, 2);
  C2 << -1.0, 0.0, 0.0, -9.0;
  D2 << 0.25, 0.75, 4.5, 4.5;
  const auto b2 = mapkit::mspp_scv_bounds(mapkit::validate_model(C2, D2));
  CHECK(b2.upper == doctest::Approx(41.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("scv bracket collapses for equal total rates") {
  Matrix C(3, 3), D(3, 3);
  C = -2.0 * Matrix::Identity(3, 3);
  D << 0.5, 1.0, 0.5,  //
      1.0, 0.5, 0.5,   //
      0.5, 0.5, 1.0;
  const auto m = mapkit::validate_model(C, D);
  const auto b = mapkit::mspp_scv_bounds(m);
  CHECK(b.upper == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mapkit::scv(m) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("scv bracket refuses a non-diagonal C") {
  const auto m = testutil::mmpp2_canonical();
  CHECK_THROWS_AS((void)mapkit::mspp_scv_bounds(m), mapkit::validation_error);
}

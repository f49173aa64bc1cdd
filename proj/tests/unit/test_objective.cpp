#include <doctest.h>

#include <cmath>
#include <random>

#include "risa/core/error.hpp"
#include "risa/objective/losses.hpp"
#include "support/fixtures.hpp"

using namespace risa;
using namespace risa::testing;

TEST_CASE("weakly supervised loss worked values") {
  const std::vector<double> p = {0.9, 0.9, 0.1};
  CHECK(weakly_supervised_loss(p, {1, 1, 0}) == doctest::Approx(-3.0 * std::log(0.9)).epsilon(1e-12));
  CHECK(weakly_supervised_loss(p, {1, 1, 0}) == doctest::Approx(0.3161).epsilon(1e-3));
  const std::vector<double> half(16, 0.5);
  CHECK(weakly_supervised_loss(half, ThermometerVector(16, 1)) == doctest::Approx(16 * std::log(2.0)));
  CHECK(weakly_supervised_loss(half, ThermometerVector(16, 0)) == doctest::Approx(16 * std::log(2.0)));
}

TEST_CASE("saturated predictions stay finite") {
  const std::vector<double> p = {0.0, 1.0, 1.0, 0.0};
  const double l = weakly_supervised_loss(p, {1, 0, 1, 0});
  CHECK(std::isfinite(l));
  CHECK(l == doctest::Approx(-2.0 * std::log(kProbabilityFloor)));
  CHECK(std::isfinite(supremum_loss(p)));
  for (double g : weakly_supervised_grad(p, {1, 0, 1, 0})) CHECK(g == 0.0);
}

TEST_CASE("contrastive terms") {
  CHECK(contrastive_positive(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 2.0);
  CHECK(contrastive_positive(std::vector<double>{0.3, 0.4}, std::vector<double>{0.3, 0.4}) == 0.0);
  CHECK_THROWS_AS(contrastive_positive(std::vector<double>{1}, std::vector<double>{0, 1}), Error);
  CHECK(contrastive_negative(0.8, 0.6, 0.5) == doctest::Approx(0.5));
  CHECK(contrastive_negative(0.2, 0.9, 0.5) == 0.0);
  for (double x : {0.0, 0.3, 0.7, 1.0}) CHECK(contrastive_negative(x, x, 1.0) == 0.0);
  CHECK_THROWS_AS(contrastive_negative(1.2, 0.5, 0.5), Error);
}

TEST_CASE("supremum loss") {
  CHECK(supremum_loss(std::vector<double>(16, 0.5)) == doctest::Approx(11.0904).epsilon(1e-5));
  CHECK(supremum_loss(std::vector<double>(4, 1.0 - 1e-12)) < 1e-6);
  CHECK(supremum_loss(std::vector<double>{0.6, 0.5}) < supremum_loss(std::vector<double>{0.5, 0.5}));
}

TEST_CASE("total is the weighted sum and weights isolate terms") {
  const auto model = tiny_model(3);
  auto c = tiny_case(5);
  c.inputs.sample = &c.sample;
  const LossWeights w{.lambda_p = 0.7, .lambda_n = 1.3, .lambda_s = 0.4, .gamma = 0.5};
  const auto l = total_loss(c.inputs, model, w);
  CHECK(l.total == doctest::Approx(l.sup + 0.7 * l.pos + 1.3 * l.neg + 0.4 * l.supre).epsilon(1e-14));
  CHECK(l.sup >= 0.0);
  CHECK(l.pos >= 0.0);
  CHECK(l.neg >= 0.0);
  CHECK(l.supre >= 0.0);

  RisaModel g = model.zeros_like();
  const auto with_grad = total_loss_and_gradient(c.inputs, model, w, g);
  CHECK(with_grad.total == l.total);
}

TEST_CASE("identical views give a zero positive term") {
  const auto model = tiny_model(3);
  auto c = tiny_case(5);
  c.inputs.sample = &c.sample;
  c.inputs.views.second = c.inputs.views.first;
  CHECK(total_loss(c.inputs, model, {}).pos == 0.0);
}

TEST_CASE("positive term is symmetric in the views") {
  const auto model = tiny_model(3);
  auto c = tiny_case(8);
  c.inputs.sample = &c.sample;
  const double a = total_loss(c.inputs, model, {}).pos;
  std::swap(c.inputs.views.first, c.inputs.views.second);
  CHECK(total_loss(c.inputs, model, {}).pos == doctest::Approx(a).epsilon(1e-15));
}

TEST_CASE("a negative sharing the true reference is rejected") {
  const auto model = tiny_model(3);
  auto c = tiny_case(5);
  c.inputs.sample = &c.sample;
  c.inputs.negative.reference_id = c.sample.reference_id;
  CHECK_THROWS_AS(total_loss(c.inputs, model, {}), Error);
  c.inputs.negative = {c.sample.reference, "some-other-id"};
  CHECK_THROWS_AS(total_loss(c.inputs, model, {}), Error);
}

TEST_CASE("analytic gradients match central differences per term") {
  const auto model = tiny_model(11);
  auto c = tiny_case(12);
  c.inputs.sample = &c.sample;
  const LossWeights w;
  const auto l = total_loss(c.inputs, model, w);
  REQUIRE(l.neg > 0.0);  // hinge active, so the negative term has a gradient
  for (Term t : {Term::Sup, Term::Pos, Term::Neg, Term::Supre, Term::Total}) {
    CAPTURE(term_name(t));
    const auto a = analytic_gradient(c.inputs, model, w, t);
    const auto n = numeric_gradient(c.inputs, model, w, t, 1e-5);
    CHECK(norm(a) > 0.0);
    CHECK(relative_error(a, n) < 1e-6);
  }
}

#include <cmath>

#include "doctest.h"
#include "gradient_check.hpp"
#include "mtfcnn/cnn.hpp"
#include "mtfcnn/error.hpp"
#include "mtfcnn/random.hpp"

using namespace mtfcnn;

namespace {

std::vector<double> random_tae(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(200);
  for (double& e : v) e = rng.uniform();
  return v;
}

}  // namespace

TEST_CASE("stage lengths and flatten width") {
  const Architecture a;
  CHECK(a.stage_lengths() == std::vector<std::size_t>{200, 191, 190, 186, 185, 181, 180, 176});
  CHECK(a.flatten_width() == 704);
  const CnnModel m = CnnModel::initialized(125, 1);
  const ForwardTrace t = forward_trace(m, random_tae(2));
  CHECK(t.lengths == a.stage_lengths());
  CHECK(t.flatten_width == 704);
}

TEST_CASE("parameter layout") {
  const ParamLayout l{Architecture{}};
  std::size_t total = 0;
  for (const auto& s : l.slots) total += s.size();
  CHECK(total == l.total);
  CHECK(l.total == 352 + 64 + 2576 + 648 + 164 + 705);
  CHECK(l.slots.front().name == "conv1.weight");
  CHECK(l.slots.back().name == "fc.bias");
}

TEST_CASE("zero model outputs zero and has zero gradients at zero targets") {
  const CnnModel z = CnnModel::zeros(500);
  const auto x = random_tae(3);
  CHECK(forward(z, x, Mode::kInfer) == 0.0);
  CHECK(forward(z, x, Mode::kTrain) == 0.0);
  const GradientResult g = backward(z, {{x, random_tae(4)}}, std::vector<double>{0.0, 0.0});
  for (double v : g.gradient) CHECK(v == 0.0);
}

TEST_CASE("inference is a pure function and non-negative") {
  const CnnModel m = CnnModel::initialized(2000, 9);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto x = random_tae(s);
    const double y = forward(m, x, Mode::kInfer);
    CHECK(y == forward(m, x, Mode::kInfer));
    CHECK(y >= 0.0);
  }
  CHECK_THROWS_AS(forward(m, std::vector<double>(199, 0.0), Mode::kInfer), ShapeError);
}

TEST_CASE("initialization is seeded and float-representable") {
  const CnnModel a = CnnModel::initialized(250, 5), b = CnnModel::initialized(250, 5);
  CHECK(a.params == b.params);
  CHECK(!(CnnModel::initialized(250, 6).params == a.params));
  for (double v : a.params) CHECK(static_cast<double>(static_cast<float>(v)) == v);
}

TEST_CASE("loss_mse") {
  CHECK(loss_mse(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 2.0}) == 0.0);
  CHECK(loss_mse(std::vector<double>{1.0}, std::vector<double>{0.0}) == 1.0);
  CHECK(loss_mse(std::vector<double>{1.0, 3.0}, std::vector<double>{0.0, 0.0}) == 5.0);
  CHECK_THROWS_AS(loss_mse(std::vector<double>{}, std::vector<double>{}), ContractError);
}

TEST_CASE("doubling sample weights doubles gradients") {
  const auto p = testing::gradient_problem(21);
  const GradientResult g1 = backward(p.model, p.x, p.y);
  BackwardOptions o;
  o.sample_weights = {2.0, 2.0};
  const GradientResult g2 = backward(p.model, p.x, p.y, o);
  for (std::size_t i = 0; i < g1.gradient.size(); ++i) {
    CHECK(g2.gradient[i] == doctest::Approx(2.0 * g1.gradient[i]).epsilon(1e-12));
  }
}

TEST_CASE("analytic gradients match central differences") {
  const auto p = testing::gradient_problem(7);
  const auto r = testing::check_gradients(p.model, p.x, p.y);
  INFO("worst " << r.worst_relative << " in " << r.worst_tensor);
  CHECK(r.checked == p.model.params.size());
  CHECK(r.failures == 0);
}

TEST_CASE("dropout masks come from the supplied stream") {
  const auto p = testing::gradient_problem(8);
  BackwardOptions o;
  o.dropout_rate = 0.5;
  o.dropout_seed = 77;
  const GradientResult a = backward(p.model, p.x, p.y, o);
  const GradientResult b = backward(p.model, p.x, p.y, o);
  CHECK(a.gradient == b.gradient);
  o.dropout_seed = 78;
  CHECK(!(backward(p.model, p.x, p.y, o).gradient == a.gradient));
}

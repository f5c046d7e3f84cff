#include <doctest.h>

#include <cmath>

#include "porcelain/objective.hpp"
#include "support.hpp"

using namespace porcelain;
using porcelain::testing::error_code_of;

namespace {

const std::int64_t kWidths[] = {2, 10, 8, 12};

torch::Tensor targets_of(std::initializer_list<std::int64_t> v) { return torch::tensor(std::vector<std::int64_t>(v)); }

}  // namespace

TEST_CASE("cross entropy reference values") {
  for (std::int64_t k : {2, 8, 10, 12}) {
    auto l = cross_entropy(torch::zeros({3, k}), torch::zeros({3}, torch::kLong));
    CHECK(l.item<double>() == doctest::Approx(std::log(static_cast<double>(k))).epsilon(1e-6));
  }
  auto sharp = torch::zeros({1, 5});
  sharp[0][2] = 30.0;
  CHECK((cross_entropy(sharp, targets_of({2})).item<double>() < 1e-9));

  auto big = torch::tensor({1000.0f, 0.0f}).reshape({1, 2});
  auto l = cross_entropy(big, targets_of({1})).item<double>();
  CHECK(std::isfinite(l));
  CHECK(l == doctest::Approx(1000.0).epsilon(1e-6));
}

TEST_CASE("cross entropy matches the library implementation") {
  torch::manual_seed(3);
  auto logits = torch::randn({16, 7}, torch::kFloat64) * 4;
  auto t = torch::randint(0, 7, {16}, torch::kLong);
  auto ours = cross_entropy(logits, t).item<double>();
  auto ref = torch::nn::functional::cross_entropy(logits, t).item<double>();
  CHECK(ours == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("cross entropy errors") {
  CHECK((error_code_of([] { cross_entropy(torch::zeros({0, 3}), torch::zeros({0}, torch::kLong)); }) ==
        ErrorCode::EmptyBatch));
  CHECK((error_code_of([] { cross_entropy(torch::zeros({2, 3}), torch::zeros({3}, torch::kLong)); }) ==
        ErrorCode::ShapeMismatch));
  CHECK((error_code_of([] { cross_entropy(torch::zeros({2, 3}), targets_of({0, 3})); }) ==
        ErrorCode::TargetOutOfRange));
  CHECK((error_code_of([] { cross_entropy(torch::zeros({2, 3}), targets_of({-1, 0})); }) ==
        ErrorCode::TargetOutOfRange));
}

TEST_CASE("total loss is the unweighted sum") {
  LogitsBundle uniform;
  TargetBundle targets;
  for (auto t : kAllTasks) {
    uniform.logits[task_index(t)] = torch::zeros({4, kWidths[task_index(t)]});
    targets.targets[task_index(t)] = torch::zeros({4}, torch::kLong);
  }
  auto b = total_loss(uniform, targets).breakdown();
  CHECK(b.total == doctest::Approx(7.560081).epsilon(1e-6));
  CHECK(b.total == doctest::Approx(std::log(1920.0)).epsilon(1e-7));

  LogitsBundle sharp;
  for (auto t : kAllTasks) {
    auto l = torch::zeros({4, kWidths[task_index(t)]});
    l.select(1, 0).fill_(40.0);
    sharp.logits[task_index(t)] = l;
  }
  CHECK(total_loss(sharp, targets).breakdown().total < 1e-9);

  TargetBundle short_targets = targets;
  short_targets.targets[2] = torch::zeros({3}, torch::kLong);
  CHECK((error_code_of([&] { total_loss(uniform, short_targets); }) == ErrorCode::ShapeMismatch));
}

TEST_CASE("closed-form gradient matches autograd") {
  torch::manual_seed(11);
  auto logits = torch::randn({6, 9}, torch::kFloat64).requires_grad_(true);
  auto t = torch::randint(0, 9, {6}, torch::kLong);
  cross_entropy(logits, t).backward();
  CHECK(torch::allclose(logits.grad(), cross_entropy_grad(logits.detach(), t), 0.0, 1e-12));
}

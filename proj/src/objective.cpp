#include "porcelain/objective.hpp"

#include "porcelain/error.hpp"

namespace porcelain {

namespace {

void check_inputs(const torch::Tensor& logits, const torch::Tensor& targets) {
  if (logits.dim() != 2 || targets.dim() != 1) {
    throw Error(ErrorCode::ShapeMismatch, "cross_entropy expects B x K logits and B targets");
  }
  if (logits.size(0) == 0) throw Error(ErrorCode::EmptyBatch, "cross_entropy on an empty batch");
  if (logits.size(0) != targets.size(0)) {
    throw Error(ErrorCode::ShapeMismatch, "logits batch " + std::to_string(logits.size(0)) + " vs targets " +
                                              std::to_string(targets.size(0)));
  }
  const auto k = logits.size(1);
  auto lo = targets.min().item<std::int64_t>();
  auto hi = targets.max().item<std::int64_t>();
  if (lo < 0 || hi >= k) {
    throw Error(ErrorCode::TargetOutOfRange, "targets must lie in [0, " + std::to_string(k) + ")");
  }
}

}  // namespace

torch::Tensor cross_entropy(const torch::Tensor& logits, const torch::Tensor& targets) {
  check_inputs(logits, targets);
  // loss = (m - x_t) + log1p(sum_{j != argmax} exp(x_j - m)); the argmax term is the exact 1, so a
  // confident correct prediction keeps full relative precision instead of cancelling to zero.
  // The shift is not detached: its gradient is what carries the argmax entry's softmax share.
  auto [shift, top] = logits.max(1, /*keepdim=*/true);
  auto shifted = logits - shift;
  auto rest = shifted.exp().scatter(1, top, 0.0).sum(1);
  auto picked = shifted.gather(1, targets.unsqueeze(1)).squeeze(1);
  return (rest.log1p() - picked).mean();
}

torch::Tensor cross_entropy_grad(const torch::Tensor& logits, const torch::Tensor& targets) {
  check_inputs(logits, targets);
  auto probs = torch::softmax(logits.detach(), 1);
  auto onehot = torch::zeros_like(probs).scatter_(1, targets.unsqueeze(1), 1.0);
  return (probs - onehot) / static_cast<double>(logits.size(0));
}

LossBreakdown TaskLosses::breakdown() const {
  LossBreakdown b;
  for (std::size_t t = 0; t < kNumTasks; ++t) b.per_task[t] = per_task[t].item<double>();
  // Summed in double so the identity holds exactly in the logged numbers.
  b.total = b.per_task[0] + b.per_task[1] + b.per_task[2] + b.per_task[3];
  return b;
}

TaskLosses total_loss(const LogitsBundle& logits, const TargetBundle& targets) {
  const auto b = logits.batch_size();
  for (std::size_t t = 0; t < kNumTasks; ++t) {
    if (logits.logits[t].size(0) != b || targets.targets[t].size(0) != b) {
      throw Error(ErrorCode::ShapeMismatch, "task " + std::string(task_name(kAllTasks[t])) +
                                                " batch dimension disagrees");
    }
  }
  TaskLosses out;
  for (std::size_t t = 0; t < kNumTasks; ++t) {
    out.per_task[t] = cross_entropy(logits.logits[t], targets.targets[t]);
  }
  out.total = out.per_task[0] + out.per_task[1] + out.per_task[2] + out.per_task[3];
  return out;
}

}  // namespace porcelain

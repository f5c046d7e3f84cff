#include "porcelain/evaluation.hpp"

#include "porcelain/error.hpp"

namespace porcelain {

EvaluationResult evaluate_model(MultiTaskNetImpl& model, const ImageDataset& data, const TaskTaxonomy& taxonomy,
                                std::size_t batch_size) {
  if (data.spec().augmentation) throw Error(ErrorCode::InvalidSpec, "evaluation data must not be augmented");
  if (data.size() == 0) throw Error(ErrorCode::EmptySplit, "nothing to evaluate");

  model.eval();
  torch::NoGradGuard guard;

  EvaluationResult out;
  for (auto t : kAllTasks) {
    out.reports[task_index(t)].task = t;
    out.reports[task_index(t)].matrix = ConfusionMatrix(taxonomy.task(t).size());
  }
  std::array<double, kNumTasks> loss_sum{};
  for (const auto& idx : data.batches(batch_size, /*shuffle=*/false, 0)) {
    auto batch = data.load(idx, 0);
    auto logits = model.forward(batch.images);
    auto losses = total_loss(logits, batch.targets).breakdown();
    const auto b = static_cast<double>(idx.size());
    for (auto t : kAllTasks) {
      const auto i = task_index(t);
      loss_sum[i] += losses.per_task[i] * b;
      auto preds = argmax_predictions(logits.logits[i]);
      auto targets = batch.targets.targets[i];
      for (std::size_t s = 0; s < preds.size(); ++s) {
        out.reports[i].matrix.add(static_cast<std::size_t>(targets[static_cast<std::int64_t>(s)].item<std::int64_t>()),
                                  static_cast<std::size_t>(preds[s]));
      }
    }
  }
  const auto n = static_cast<double>(data.size());
  for (std::size_t i = 0; i < kNumTasks; ++i) {
    out.loss.per_task[i] = loss_sum[i] / n;
    out.reports[i].metrics = metrics_from_matrix(out.reports[i].matrix);
  }
  out.loss.total = out.loss.per_task[0] + out.loss.per_task[1] + out.loss.per_task[2] + out.loss.per_task[3];
  return out;
}

}  // namespace porcelain

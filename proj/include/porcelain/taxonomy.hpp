#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace porcelain {

struct SampleRecord;

// The four classification axes, in canonical order.
enum class TaskId : std::size_t { Dynasty = 0, Ware = 1, Glaze = 2, Type = 3 };

inline constexpr std::size_t kNumTasks = 4;
inline constexpr std::array<TaskId, kNumTasks> kAllTasks = {TaskId::Dynasty, TaskId::Ware,
                                                            TaskId::Glaze, TaskId::Type};

constexpr std::size_t task_index(TaskId t) { return static_cast<std::size_t>(t); }

// Lowercase identifier used in files and flags ("dynasty", ...).
std::string_view task_name(TaskId t);
// Capitalised label used in rendered tables ("Dynasty", ...).
std::string_view task_display_name(TaskId t);
// Throws UnknownTask.
TaskId parse_task(std::string_view name);

struct TaskSpec {
  TaskId id;
  std::string name;
  std::vector<std::string> categories;
  // Informational only; never used to validate user manifests.
  std::vector<std::int64_t> reference_counts;

  std::size_t size() const { return categories.size(); }
};

class TaskTaxonomy {
 public:
  explicit TaskTaxonomy(std::array<TaskSpec, kNumTasks> tasks);

  const TaskSpec& task(TaskId t) const { return tasks_[task_index(t)]; }
  const TaskSpec& task(std::string_view name) const;
  std::span<const TaskSpec> tasks() const { return tasks_; }

  std::array<std::int64_t, kNumTasks> cardinalities() const;

  // One block per task: a "task<TAB>name" line followed by "index<TAB>category" lines.
  std::string to_text() const;
  // Hash of to_text(); stored alongside checkpoints.
  std::string fingerprint() const;

 private:
  std::array<TaskSpec, kNumTasks> tasks_;
};

// The porcelain label space: Song/Yuan dynasties, ten wares, eight glazes,
// twelve vessel types, with the museum corpus counts attached.
const TaskTaxonomy& build_taxonomy();

// Case-insensitive after trimming. Throws UnknownTask / UnknownCategory.
std::int64_t encode_label(const TaskTaxonomy& taxonomy, std::string_view task, std::string_view category);
std::int64_t encode_label(const TaskTaxonomy& taxonomy, TaskId task, std::string_view category);

// Throws IndexOutOfRange.
const std::string& decode_label(const TaskTaxonomy& taxonomy, std::string_view task, std::int64_t index);
const std::string& decode_label(const TaskTaxonomy& taxonomy, TaskId task, std::int64_t index);

using LabelHistogram = std::array<std::vector<std::int64_t>, kNumTasks>;

// Per-task category counts. Throws UnknownCategory naming the offending sample.
LabelHistogram label_histogram(const TaskTaxonomy& taxonomy, std::span<const SampleRecord> records);

std::string histogram_to_text(const TaskTaxonomy& taxonomy, const LabelHistogram& histogram);

}  // namespace porcelain

#pragma once

#include <array>
#include <filesystem>
#include <string>

#include "porcelain/taxonomy.hpp"

namespace porcelain {

// One manifest row: an image and its four category names.
struct SampleRecord {
  std::string sample_id;
  std::filesystem::path image_path;
  std::array<std::string, kNumTasks> labels;  // indexed by TaskId

  const std::string& label(TaskId t) const { return labels[task_index(t)]; }
};

// Category indices for one record, indexed by TaskId.
using EncodedLabels = std::array<std::int64_t, kNumTasks>;

EncodedLabels encode_record(const TaskTaxonomy& taxonomy, const SampleRecord& record);

}  // namespace porcelain

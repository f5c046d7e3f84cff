#include "porcelain/taxonomy.hpp"

#include <numeric>
#include <unordered_set>

#include "porcelain/error.hpp"
#include "porcelain/record.hpp"
#include "porcelain/text_util.hpp"

namespace porcelain {

std::string_view task_name(TaskId t) {
  switch (t) {
    case TaskId::Dynasty: return "dynasty";
    case TaskId::Ware: return "ware";
    case TaskId::Glaze: return "glaze";
    case TaskId::Type: return "type";
  }
  return "?";
}

std::string_view task_display_name(TaskId t) {
  switch (t) {
    case TaskId::Dynasty: return "Dynasty";
    case TaskId::Ware: return "Ware";
    case TaskId::Glaze: return "Glaze";
    case TaskId::Type: return "Type";
  }
  return "?";
}

TaskId parse_task(std::string_view name) {
  auto key = text::to_lower(text::trim(name));
  for (auto t : kAllTasks) {
    if (task_name(t) == key) return t;
  }
  throw Error(ErrorCode::UnknownTask,
              "'" + std::string(name) + "' (valid: dynasty, ware, glaze, type)");
}

TaskTaxonomy::TaskTaxonomy(std::array<TaskSpec, kNumTasks> tasks) : tasks_(std::move(tasks)) {
  for (std::size_t i = 0; i < kNumTasks; ++i) {
    const auto& spec = tasks_[i];
    if (task_index(spec.id) != i) {
      throw Error(ErrorCode::InvalidSpec, "task blocks out of canonical order");
    }
    if (spec.categories.size() < 2) {
      throw Error(ErrorCode::InvalidSpec, "task " + spec.name + " needs at least two categories");
    }
    if (!spec.reference_counts.empty() && spec.reference_counts.size() != spec.categories.size()) {
      throw Error(ErrorCode::InvalidSpec, "task " + spec.name + ": count/category length mismatch");
    }
    std::unordered_set<std::string> seen;
    for (const auto& c : spec.categories) {
      if (text::trim(c).empty()) {
        throw Error(ErrorCode::InvalidSpec, "task " + spec.name + " has an empty category name");
      }
      if (!seen.insert(text::to_lower(c)).second) {
        throw Error(ErrorCode::InvalidSpec, "task " + spec.name + " repeats category " + c);
      }
    }
    for (auto n : spec.reference_counts) {
      if (n < 0) throw Error(ErrorCode::InvalidSpec, "negative reference count in " + spec.name);
    }
  }
}

const TaskSpec& TaskTaxonomy::task(std::string_view name) const { return task(parse_task(name)); }

std::array<std::int64_t, kNumTasks> TaskTaxonomy::cardinalities() const {
  std::array<std::int64_t, kNumTasks> out{};
  for (std::size_t i = 0; i < kNumTasks; ++i) out[i] = static_cast<std::int64_t>(tasks_[i].size());
  return out;
}

std::string TaskTaxonomy::to_text() const {
  std::string out;
  for (const auto& spec : tasks_) {
    out += "task\t" + spec.name + "\n";
    for (std::size_t i = 0; i < spec.categories.size(); ++i) {
      out += std::to_string(i) + "\t" + spec.categories[i] + "\n";
    }
    out += "\n";
  }
  return out;
}

std::string TaskTaxonomy::fingerprint() const { return text::hex64(text::fnv1a64(to_text())); }

const TaskTaxonomy& build_taxonomy() {
  static const TaskTaxonomy taxonomy([] {
    std::array<TaskSpec, kNumTasks> tasks{
        TaskSpec{TaskId::Dynasty, "dynasty", {"Song", "Yuan"}, {5288, 705}},
        TaskSpec{TaskId::Ware,
                 "ware",
                 {"Ding", "Jizhou", "Ge", "Guan", "Jun", "Longquan", "Ru", "Xianghu", "Linchuan", "Peng"},
                 {2296, 167, 416, 1401, 263, 385, 677, 76, 98, 214}},
        TaskSpec{TaskId::Glaze,
                 "glaze",
                 {"White", "Black", "Celadon", "Green", "Moonwhite", "Yellowishgreen", "Bluishwhite", "Blue"},
                 {2668, 113, 2379, 577, 54, 4, 64, 134}},
        TaskSpec{TaskId::Type,
                 "type",
                 {"Washer", "Dish", "Bowl", "Plate", "Teabowlstand", "Pillow", "Basin", "Vase", "Jar",
                  "Incenseburner", "Vessel", "Cup"},
                 {747, 1610, 2002, 127, 64, 112, 244, 565, 74, 157, 147, 144}},
    };
    return tasks;
  }());
  return taxonomy;
}

std::int64_t encode_label(const TaskTaxonomy& taxonomy, TaskId task, std::string_view category) {
  const auto& spec = taxonomy.task(task);
  auto key = text::to_lower(text::trim(category));
  for (std::size_t i = 0; i < spec.categories.size(); ++i) {
    if (text::to_lower(spec.categories[i]) == key) return static_cast<std::int64_t>(i);
  }
  throw Error(ErrorCode::UnknownCategory, "'" + std::string(category) + "' is not a " + spec.name +
                                              " category (valid: " + text::join(spec.categories, ", ") + ")");
}

std::int64_t encode_label(const TaskTaxonomy& taxonomy, std::string_view task, std::string_view category) {
  return encode_label(taxonomy, parse_task(task), category);
}

const std::string& decode_label(const TaskTaxonomy& taxonomy, TaskId task, std::int64_t index) {
  const auto& spec = taxonomy.task(task);
  if (index < 0 || index >= static_cast<std::int64_t>(spec.size())) {
    throw Error(ErrorCode::IndexOutOfRange, "index " + std::to_string(index) + " outside [0, " +
                                                std::to_string(spec.size()) + ") for " + spec.name);
  }
  return spec.categories[static_cast<std::size_t>(index)];
}

const std::string& decode_label(const TaskTaxonomy& taxonomy, std::string_view task, std::int64_t index) {
  return decode_label(taxonomy, parse_task(task), index);
}

EncodedLabels encode_record(const TaskTaxonomy& taxonomy, const SampleRecord& record) {
  EncodedLabels out{};
  for (auto t : kAllTasks) {
    try {
      out[task_index(t)] = encode_label(taxonomy, t, record.label(t));
    } catch (const Error& e) {
      throw Error(e.code(), "sample '" + record.sample_id + "': " + e.detail());
    }
  }
  return out;
}

LabelHistogram label_histogram(const TaskTaxonomy& taxonomy, std::span<const SampleRecord> records) {
  LabelHistogram hist;
  for (auto t : kAllTasks) hist[task_index(t)].assign(taxonomy.task(t).size(), 0);
  for (const auto& r : records) {
    auto enc = encode_record(taxonomy, r);
    for (auto t : kAllTasks) ++hist[task_index(t)][static_cast<std::size_t>(enc[task_index(t)])];
  }
  return hist;
}

std::string histogram_to_text(const TaskTaxonomy& taxonomy, const LabelHistogram& histogram) {
  std::string out = "task\tcategory\tcount\n";
  for (auto t : kAllTasks) {
    const auto& spec = taxonomy.task(t);
    for (std::size_t i = 0; i < spec.size(); ++i) {
      out += spec.name + "\t" + spec.categories[i] + "\t" + std::to_string(histogram[task_index(t)][i]) + "\n";
    }
  }
  return out;
}

}  // namespace porcelain

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "porcelain/record.hpp"

namespace porcelain {

enum class SplitName { Train, Val, Test };

std::string_view split_name(SplitName s);
SplitName parse_split_name(std::string_view s);  // throws InvalidValue

struct SplitAssignment {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  std::uint64_t seed = 0;
  // Fixed 8:1:1; recorded in the persisted header.
  std::array<double, 3> ratios{0.8, 0.1, 0.1};

  const std::vector<std::string>& members(SplitName s) const;
  std::size_t size() const { return train.size() + val.size() + test.size(); }
};

// Sizes used for a manifest of n samples: floor(0.8n), floor(0.1n), remainder.
std::array<std::size_t, 3> split_sizes(std::size_t n);

// Seeded uniform permutation of the records followed by contiguous slicing.
// Not stratified. Throws TooFewSamples when fewer than 3 records are given.
SplitAssignment split_dataset(std::span<const SampleRecord> records, std::uint64_t seed);

// "# seed=<s>" and "# ratios=0.8,0.1,0.1" header lines, then "sample_id<TAB>split" lines.
std::string split_to_text(const SplitAssignment& split);
SplitAssignment split_from_text(std::string_view text);
void save_split(const SplitAssignment& split, const std::filesystem::path& path);
SplitAssignment load_split(const std::filesystem::path& path);

// Records of `all` belonging to split `s`, in split order. Throws EmptySplit
// when a listed sample_id is missing from `all`.
std::vector<SampleRecord> select_split(std::span<const SampleRecord> all, const SplitAssignment& split,
                                       SplitName s);

}  // namespace porcelain

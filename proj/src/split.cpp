#include "porcelain/split.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <unordered_map>

#include "porcelain/error.hpp"
#include "porcelain/text_util.hpp"

namespace porcelain {

std::string_view split_name(SplitName s) {
  switch (s) {
    case SplitName::Train: return "train";
    case SplitName::Val: return "val";
    case SplitName::Test: return "test";
  }
  return "?";
}

SplitName parse_split_name(std::string_view s) {
  auto key = text::to_lower(text::trim(s));
  if (key == "train") return SplitName::Train;
  if (key == "val" || key == "valid" || key == "validation") return SplitName::Val;
  if (key == "test") return SplitName::Test;
  throw Error(ErrorCode::InvalidValue, "split '" + std::string(s) + "' (valid: train, val, test)");
}

const std::vector<std::string>& SplitAssignment::members(SplitName s) const {
  switch (s) {
    case SplitName::Train: return train;
    case SplitName::Val: return val;
    case SplitName::Test: break;
  }
  return test;
}

std::array<std::size_t, 3> split_sizes(std::size_t n) {
  // Integer arithmetic keeps floor(0.8n) exact for every n.
  std::size_t train = (8 * n) / 10;
  std::size_t val = n / 10;
  return {train, val, n - train - val};
}

SplitAssignment split_dataset(std::span<const SampleRecord> records, std::uint64_t seed) {
  if (records.size() < 3) {
    throw Error(ErrorCode::TooFewSamples, "need at least 3 samples to split, got " + std::to_string(records.size()));
  }
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  auto sizes = split_sizes(records.size());
  SplitAssignment out;
  out.seed = seed;
  std::size_t i = 0;
  for (; i < sizes[0]; ++i) out.train.push_back(records[order[i]].sample_id);
  for (; i < sizes[0] + sizes[1]; ++i) out.val.push_back(records[order[i]].sample_id);
  for (; i < order.size(); ++i) out.test.push_back(records[order[i]].sample_id);
  return out;
}

std::string split_to_text(const SplitAssignment& split) {
  std::string out = "# seed=" + std::to_string(split.seed) + "\n";
  out += "# ratios=" + text::format_real(split.ratios[0]) + "," + text::format_real(split.ratios[1]) + "," +
         text::format_real(split.ratios[2]) + "\n";
  for (auto s : {SplitName::Train, SplitName::Val, SplitName::Test}) {
    for (const auto& id : split.members(s)) out += id + "\t" + std::string(split_name(s)) + "\n";
  }
  return out;
}

SplitAssignment split_from_text(std::string_view contents) {
  SplitAssignment out;
  std::size_t ln = 0;
  for (const auto& raw : text::split(contents, '\n')) {
    ++ln;
    auto line = text::trim(raw);
    if (line.empty()) continue;
    if (line.starts_with("#")) {
      auto body = text::trim(line.substr(1));
      if (body.starts_with("seed=")) {
        out.seed = static_cast<std::uint64_t>(text::parse_int(body.substr(5)));
      } else if (body.starts_with("ratios=")) {
        auto parts = text::split(body.substr(7), ',');
        if (parts.size() != 3) throw Error(ErrorCode::ParseError, "split file line " + std::to_string(ln));
        for (std::size_t i = 0; i < 3; ++i) out.ratios[i] = text::parse_real(parts[i]);
      }
      continue;
    }
    auto tab = line.rfind('\t');
    if (tab == std::string_view::npos) {
      throw Error(ErrorCode::ParseError, "split file line " + std::to_string(ln) + " lacks a tab");
    }
    std::string id(line.substr(0, tab));
    switch (parse_split_name(line.substr(tab + 1))) {
      case SplitName::Train: out.train.push_back(std::move(id)); break;
      case SplitName::Val: out.val.push_back(std::move(id)); break;
      case SplitName::Test: out.test.push_back(std::move(id)); break;
    }
  }
  return out;
}

void save_split(const SplitAssignment& split, const std::filesystem::path& path) {
  text::write_file(path, split_to_text(split));
}

SplitAssignment load_split(const std::filesystem::path& path) { return split_from_text(text::read_file(path)); }

std::vector<SampleRecord> select_split(std::span<const SampleRecord> all, const SplitAssignment& split,
                                       SplitName s) {
  std::unordered_map<std::string_view, const SampleRecord*> by_id;
  for (const auto& r : all) by_id.emplace(r.sample_id, &r);
  std::vector<SampleRecord> out;
  for (const auto& id : split.members(s)) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::EmptySplit, "split lists sample '" + id + "' absent from the manifest");
    }
    out.push_back(*it->second);
  }
  return out;
}

}  // namespace porcelain

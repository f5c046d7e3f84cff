#include "porcelain/checkpoint.hpp"

#include <map>

#include "porcelain/error.hpp"
#include "porcelain/text_util.hpp"

namespace porcelain {

namespace {

std::string bool_text(bool b) { return b ? "true" : "false"; }

bool parse_bool_field(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw Error(ErrorCode::ParseError, "descriptor field " + key + " is not a boolean");
}

}  // namespace

std::string descriptor_to_text(const RunDescriptor& d) {
  std::string out;
  auto kv = [&](const std::string& k, const std::string& v) { out += k + "=" + v + "\n"; };
  kv("label", d.label);
  kv("arch", std::string(arch_name(d.spec.arch)));
  kv("pretrained", bool_text(d.spec.pretrained));
  kv("freeze_backbone", bool_text(d.spec.freeze_backbone));
  kv("input_side", std::to_string(d.spec.input_side));
  for (int c = 0; c < 3; ++c) {
    kv("mean_" + std::to_string(c), text::format_real(d.preprocess.channel_means[static_cast<std::size_t>(c)]));
    kv("std_" + std::to_string(c), text::format_real(d.preprocess.channel_stds[static_cast<std::size_t>(c)]));
  }
  kv("taxonomy_fingerprint", d.taxonomy_fingerprint);
  kv("config_hash", d.config_hash);
  kv("seed", std::to_string(d.seed));
  kv("split_seed", std::to_string(d.split_seed));
  return out;
}

RunDescriptor descriptor_from_text(std::string_view contents) {
  std::map<std::string, std::string> kv;
  for (const auto& line : text::split(contents, '\n')) {
    auto l = text::trim(line);
    if (l.empty() || l.starts_with("#")) continue;
    auto eq = l.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::ParseError, "descriptor line without '='");
    kv[std::string(text::trim(l.substr(0, eq)))] = std::string(text::trim(l.substr(eq + 1)));
  }
  auto get = [&](const std::string& k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) throw Error(ErrorCode::ParseError, "descriptor lacks '" + k + "'");
    return it->second;
  };
  RunDescriptor d;
  d.label = get("label");
  d.spec.arch = parse_arch(get("arch"));
  d.spec.pretrained = parse_bool_field("pretrained", get("pretrained"));
  d.spec.freeze_backbone = parse_bool_field("freeze_backbone", get("freeze_backbone"));
  d.spec.input_side = static_cast<int>(text::parse_int(get("input_side")));
  d.preprocess.target_side = d.spec.input_side;
  for (int c = 0; c < 3; ++c) {
    const auto i = static_cast<std::size_t>(c);
    d.preprocess.channel_means[i] = static_cast<float>(text::parse_real(get("mean_" + std::to_string(c))));
    d.preprocess.channel_stds[i] = static_cast<float>(text::parse_real(get("std_" + std::to_string(c))));
  }
  d.taxonomy_fingerprint = get("taxonomy_fingerprint");
  d.config_hash = get("config_hash");
  d.seed = static_cast<std::uint64_t>(text::parse_int(get("seed")));
  d.split_seed = static_cast<std::uint64_t>(text::parse_int(get("split_seed")));
  return d;
}

void save_weights(MultiTaskNetImpl& model, const std::filesystem::path& path) {
  torch::serialize::OutputArchive archive;
  model.save(archive);
  auto tmp = path;
  tmp += ".tmp";
  try {
    archive.save_to(tmp.string());
  } catch (const c10::Error& e) {
    throw Error(ErrorCode::IoError, "cannot write " + path.string() + ": " + e.what_without_backtrace());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot rename into " + path.string());
}

void load_weights(MultiTaskNetImpl& model, const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::IoError, "no checkpoint at " + path.string());
  torch::serialize::InputArchive archive;
  try {
    archive.load_from(path.string());
    model.load(archive);
    model.to_channels_last();
  } catch (const c10::Error& e) {
    throw Error(ErrorCode::IoError, "cannot load " + path.string() + ": " + e.what_without_backtrace());
  }
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& run_dir, const TaskTaxonomy& taxonomy) {
  LoadedCheckpoint out;
  out.descriptor = descriptor_from_text(text::read_file(run_dir / "spec.txt"));
  if (out.descriptor.taxonomy_fingerprint != taxonomy.fingerprint()) {
    throw Error(ErrorCode::CheckpointMismatch, run_dir.string() + " was trained on taxonomy " +
                                                   out.descriptor.taxonomy_fingerprint + ", current is " +
                                                   taxonomy.fingerprint());
  }
  // Constructing directly (not build_model) skips the pretrained-weight fetch.
  out.model = MultiTaskNet(out.descriptor.spec, taxonomy);
  load_weights(*out.model, run_dir / "best.ckpt");
  return out;
}

}  // namespace porcelain

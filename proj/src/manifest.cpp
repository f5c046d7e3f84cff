#include "porcelain/manifest.hpp"

#include <array>
#include <optional>
#include <unordered_set>

#include "porcelain/error.hpp"
#include "porcelain/text_util.hpp"

namespace porcelain {

namespace {

constexpr std::array<std::string_view, 6> kColumns = {"sample_id", "image_path", "dynasty",
                                                      "ware",      "glaze",      "type"};

// Splits one line, honouring double-quoted fields with "" escapes.
std::vector<std::string> split_fields(std::string_view line, char delim) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string quote_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string row_ref(const std::filesystem::path& path, std::size_t line_no) {
  return path.filename().string() + " row " + std::to_string(line_no);
}

}  // namespace

std::vector<SampleRecord> load_manifest(const std::filesystem::path& path, const TaskTaxonomy& taxonomy) {
  auto contents = text::read_file(path);
  if (contents.starts_with("\xEF\xBB\xBF")) contents.erase(0, 3);
  auto lines = text::split(contents, '\n');

  std::size_t header_line = 0;
  while (header_line < lines.size() && text::trim(lines[header_line]).empty()) ++header_line;
  if (header_line == lines.size()) throw Error(ErrorCode::EmptyManifest, path.string() + " has no header row");

  std::string_view header = text::trim(lines[header_line]);
  const char delim = header.find('\t') != std::string_view::npos ? '\t' : ',';
  auto header_fields = split_fields(header, delim);

  std::array<std::size_t, kColumns.size()> col{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    std::optional<std::size_t> found;
    for (std::size_t i = 0; i < header_fields.size(); ++i) {
      if (text::to_lower(text::trim(header_fields[i])) == kColumns[c]) found = i;
    }
    if (!found) {
      throw Error(ErrorCode::MissingColumn, path.filename().string() + " lacks column '" +
                                                std::string(kColumns[c]) + "'");
    }
    col[c] = *found;
  }
  std::size_t needed = 0;
  for (auto c : col) needed = std::max(needed, c + 1);

  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::vector<SampleRecord> records;
  std::unordered_set<std::string> ids;
  for (std::size_t ln = header_line + 1; ln < lines.size(); ++ln) {
    std::string_view line = lines[ln];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) continue;
    const auto row = row_ref(path, ln + 1);
    auto fields = split_fields(line, delim);
    if (fields.size() < needed) {
      throw Error(ErrorCode::MissingColumn, row + " has " + std::to_string(fields.size()) + " fields, expected " +
                                                std::to_string(needed));
    }
    SampleRecord r;
    r.sample_id = std::string(text::trim(fields[col[0]]));
    if (r.sample_id.empty()) throw Error(ErrorCode::MissingColumn, row + " has an empty sample_id");
    std::filesystem::path img(std::string(text::trim(fields[col[1]])));
    if (img.empty()) throw Error(ErrorCode::MissingColumn, row + " has an empty image_path");
    r.image_path = img.is_absolute() ? img : base / img;
    for (auto t : kAllTasks) {
      auto raw = text::trim(fields[col[2 + task_index(t)]]);
      try {
        r.labels[task_index(t)] = decode_label(taxonomy, t, encode_label(taxonomy, t, raw));
      } catch (const Error& e) {
        throw Error(e.code(), row + " (sample '" + r.sample_id + "'): " + e.detail());
      }
    }
    if (!ids.insert(r.sample_id).second) {
      throw Error(ErrorCode::DuplicateSampleId, row + " repeats sample_id '" + r.sample_id + "'");
    }
    records.push_back(std::move(r));
  }
  if (records.empty()) throw Error(ErrorCode::EmptyManifest, path.string() + " has no data rows");
  return records;
}

std::string manifest_to_text(const std::vector<SampleRecord>& records, const std::filesystem::path& base_dir) {
  std::string out;
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    if (c) out += ',';
    out += kColumns[c];
  }
  out += '\n';
  for (const auto& r : records) {
    auto rel = r.image_path.lexically_relative(base_dir);
    bool inside = !rel.empty() && !rel.string().starts_with("..");
    std::string img = (inside && !base_dir.empty()) ? rel.generic_string() : r.image_path.generic_string();
    out += quote_field(r.sample_id) + ',' + quote_field(img);
    for (const auto& l : r.labels) out += ',' + quote_field(l);
    out += '\n';
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<SampleRecord>& records) {
  text::write_file(path, manifest_to_text(records, path.parent_path()));
}

}  // namespace porcelain

#pragma once

#include <filesystem>
#include <vector>

#include "porcelain/record.hpp"
#include "porcelain/taxonomy.hpp"

namespace porcelain {

// Manifest files are comma- (or tab-) separated UTF-8 text with the header
//   sample_id,image_path,dynasty,ware,glaze,type
// Columns may appear in any order; extra columns are ignored. Relative image
// paths resolve against the manifest's directory. Images are not opened here.
//
// Throws MissingColumn, UnknownCategory, DuplicateSampleId, EmptyManifest, IoError.
std::vector<SampleRecord> load_manifest(const std::filesystem::path& path, const TaskTaxonomy& taxonomy);

// Image paths are written relative to `base_dir` when they live beneath it.
std::string manifest_to_text(const std::vector<SampleRecord>& records, const std::filesystem::path& base_dir);
void write_manifest(const std::filesystem::path& path, const std::vector<SampleRecord>& records);

}  // namespace porcelain

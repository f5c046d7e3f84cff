#include <doctest.h>

#include <set>

#include <opencv2/imgcodecs.hpp>

#include "porcelain/dataset.hpp"
#include "porcelain/image_ops.hpp"
#include "porcelain/manifest.hpp"
#include "porcelain/split.hpp"
#include "porcelain/synthetic.hpp"
#include "porcelain/text_util.hpp"
#include "support.hpp"

using namespace porcelain;
using porcelain::testing::error_code_of;
using porcelain::testing::TempDir;

namespace {

std::vector<SampleRecord> fake_records(std::size_t n) {
  std::vector<SampleRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(SampleRecord{"id" + std::to_string(i), "img.png", {"Song", "Ding", "White", "Bowl"}});
  }
  return out;
}

bool mats_equal(const cv::Mat& a, const cv::Mat& b) {
  return a.size() == b.size() && a.type() == b.type() && cv::norm(a, b, cv::NORM_INF) == 0.0;
}

}  // namespace

TEST_CASE("manifest loading") {
  TempDir dir("manifest");
  const auto& tx = build_taxonomy();
  text::write_file(dir / "m.csv", "sample_id,image_path,dynasty,ware,glaze,type\nA1,imgs/a.png,song,Ding,White,Bowl\n");
  auto recs = load_manifest(dir / "m.csv", tx);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].labels[0] == "Song");
  CHECK(recs[0].image_path == (dir / "imgs/a.png").string());

  // Column order follows the header; tab-delimited is accepted.
  text::write_file(dir / "t.tsv", "type\tglaze\tware\tdynasty\timage_path\tsample_id\nBowl\tBlue\tRu\tYuan\tx.png\tB\n");
  recs = load_manifest(dir / "t.tsv", tx);
  CHECK((recs[0].labels == std::array<std::string, 4>{"Yuan", "Ru", "Blue", "Bowl"}));

  text::write_file(dir / "bad.csv",
                   "sample_id,image_path,dynasty,ware,glaze,type\nA,a.png,Song,Ding,White,Bowl\n"
                   "B,b.png,Song,Ding,Turquoise,Bowl\n");
  try {
    load_manifest(dir / "bad.csv", tx);
    FAIL("expected UnknownCategory");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownCategory);
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }
  text::write_file(dir / "dup.csv", "sample_id,image_path,dynasty,ware,glaze,type\nA,a,Song,Ding,White,Bowl\nA,b,Song,Ding,White,Bowl\n");
  CHECK((error_code_of([&] { load_manifest(dir / "dup.csv", tx); }) == ErrorCode::DuplicateSampleId));
  text::write_file(dir / "nocol.csv", "sample_id,image_path,dynasty,ware,glaze\nA,a,Song,Ding,White\n");
  CHECK((error_code_of([&] { load_manifest(dir / "nocol.csv", tx); }) == ErrorCode::MissingColumn));
  text::write_file(dir / "empty.csv", "sample_id,image_path,dynasty,ware,glaze,type\n");
  CHECK((error_code_of([&] { load_manifest(dir / "empty.csv", tx); }) == ErrorCode::EmptyManifest));
}

TEST_CASE("manifest write/load round trip") {
  TempDir dir("manifest-rt");
  std::vector<SampleRecord> recs{{"a,1", (dir / "x y.png").string(), {"Song", "Ge", "Celadon", "Vase"}},
                                 {"b\"2", (dir / "sub/z.png").string(), {"Yuan", "Peng", "Bluishwhite", "Jar"}}};
  write_manifest(dir / "m.csv", recs);
  auto back = load_manifest(dir / "m.csv", build_taxonomy());
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].sample_id == recs[i].sample_id);
    CHECK(back[i].image_path == recs[i].image_path);
    CHECK(back[i].labels == recs[i].labels);
  }
}

TEST_CASE("split sizes and determinism") {
  CHECK((split_sizes(5993) == std::array<std::size_t, 3>{4794, 599, 600}));
  CHECK((split_sizes(10) == std::array<std::size_t, 3>{8, 1, 1}));
  auto recs = fake_records(100);
  auto a = split_dataset(recs, 3);
  auto b = split_dataset(recs, 3);
  CHECK(a.train == b.train);
  CHECK(a.val == b.val);
  CHECK(a.test == b.test);
  CHECK(split_dataset(recs, 4).train != a.train);
  CHECK((error_code_of([&] { split_dataset(fake_records(2), 1); }) == ErrorCode::TooFewSamples));

  auto back = split_from_text(split_to_text(a));
  CHECK(back.train == a.train);
  CHECK(back.val == a.val);
  CHECK(back.test == a.test);
  CHECK(back.seed == 3);
  auto sel = select_split(recs, a, SplitName::Val);
  REQUIRE(sel.size() == 10);
  CHECK(sel[0].sample_id == a.val[0]);
  auto missing = a;
  missing.val.push_back("nope");
  CHECK((error_code_of([&] { select_split(recs, missing, SplitName::Val); }) == ErrorCode::EmptySplit));
}

TEST_CASE("preprocess") {
  cv::Mat img(480, 640, CV_8UC3, cv::Scalar(10, 200, 30));
  PreprocessSpec spec;
  auto t = preprocess_image(img, spec);
  CHECK((t.sizes() == torch::IntArrayRef{3, 224, 224}));
  CHECK(t.dtype() == torch::kFloat32);

  PreprocessSpec unit;
  unit.channel_means = {0, 0, 0};
  unit.channel_stds = {1, 1, 1};
  cv::Mat noise(224, 224, CV_8UC3);
  cv::randu(noise, 0, 256);
  auto u = preprocess_image(noise, unit);
  CHECK(u.min().item<float>() >= 0.0f);
  CHECK(u.max().item<float>() <= 1.0f);

  // Mean-valued image normalises to zero: use means that are exact 8-bit levels.
  PreprocessSpec centred;
  centred.channel_means = {51.0f / 255.0f, 102.0f / 255.0f, 204.0f / 255.0f};
  centred.channel_stds = {1, 1, 1};
  cv::Mat flat(100, 100, CV_8UC3, cv::Scalar(51, 102, 204));
  CHECK(preprocess_image(flat, centred).abs().max().item<float>() < 1e-6f);

  PreprocessSpec bad;
  bad.target_side = 8;
  CHECK((error_code_of([&] { bad.validate(); }) == ErrorCode::InvalidSpec));
  CHECK((error_code_of([&] { resize_square(cv::Mat(), 224); }) == ErrorCode::ZeroSizeImage));
}

TEST_CASE("augmentation contracts") {
  cv::Mat img(64, 80, CV_8UC3);
  cv::randu(img, 0, 256);
  std::mt19937_64 rng(5);
  CHECK((mats_equal(augment_image(img, {0.0, 0.0}, rng), img)));
  auto once = augment_image(img, {1.0, 0.0}, rng);
  CHECK_FALSE(mats_equal(once, img));
  CHECK((mats_equal(augment_image(once, {1.0, 0.0}, rng), img)));
  std::mt19937_64 r1(9), r2(9);
  CHECK((mats_equal(augment_image(img, {}, r1), augment_image(img, {}, r2))));
  CHECK((augment_image(img, {}, r1).size() == img.size()));
  CHECK((error_code_of([] { AugmentSpec{1.5, 0}.validate(); }) == ErrorCode::InvalidSpec));
}

TEST_CASE("decode") {
  TempDir dir("decode");
  cv::Mat gray(20, 30, CV_8UC1, cv::Scalar(77));
  cv::imwrite((dir / "g.png").string(), gray);
  auto rgb = decode_image(dir / "g.png");
  CHECK(rgb.channels() == 3);
  CHECK(rgb.size() == cv::Size(30, 20));
  text::write_file(dir / "junk.png", "not an image");
  CHECK((error_code_of([&] { decode_image(dir / "junk.png"); }) == ErrorCode::UndecodableImage));
  CHECK((error_code_of([&] { decode_image(dir / "absent.png"); }) == ErrorCode::UndecodableImage));
}

TEST_CASE("synthetic dataset") {
  TempDir a("synth-a"), b("synth-b");
  const auto& tx = build_taxonomy();
  auto ma = generate_synthetic_dataset(240, 7, a.path());
  auto mb = generate_synthetic_dataset(240, 7, b.path());
  CHECK(text::read_file(ma) == text::read_file(mb));
  auto recs = load_manifest(ma, tx);
  CHECK(recs.size() == 240);
  CHECK(text::read_file(recs[17].image_path) ==
        text::read_file(b.path() / std::filesystem::relative(recs[17].image_path, a.path())));

  // Uniform per task: every count within 3 sigma of n/K (binomial, n = 240).
  auto h = label_histogram(tx, recs);
  for (std::size_t t = 0; t < kNumTasks; ++t) {
    const double k = static_cast<double>(h[t].size());
    const double mean = 240.0 / k;
    const double sigma = std::sqrt(240.0 * (1.0 / k) * (1.0 - 1.0 / k));
    for (auto c : h[t]) {
      CHECK(std::abs(static_cast<double>(c) - mean) <= 3.0 * sigma);
    }
  }
  auto img = decode_image(recs[0].image_path);
  CHECK(img.size() == cv::Size(96, 96));
  CHECK((error_code_of([&] { generate_synthetic_dataset(5, 1, a / "small"); }) == ErrorCode::InvalidSpec));
}

TEST_CASE("synthetic cues separate categories") {
  // Images differing only in one label must differ; identical labels and seeds agree.
  EncodedLabels base{0, 0, 0, 0};
  auto ref = render_synthetic_image(base, 1);
  CHECK(mats_equal(ref, render_synthetic_image(base, 1)));
  for (std::size_t t = 0; t < kNumTasks; ++t) {
    auto other = base;
    other[t] = 1;
    SyntheticOptions quiet;
    quiet.noise_sigma = 0;
    CHECK_FALSE(mats_equal(render_synthetic_image(base, 1, quiet), render_synthetic_image(other, 1, quiet)));
  }
}

TEST_CASE("dataset batches") {
  TempDir dir("dataset");
  const auto& tx = build_taxonomy();
  auto recs = load_manifest(generate_synthetic_dataset(12, 3, dir.path()), tx);
  PreprocessSpec spec;
  spec.target_side = 64;
  ImageDataset ds(recs, tx, spec, 1);
  auto ordered = ds.batches(5, false, 0);
  CHECK(ordered.size() == 3);
  CHECK(ordered.back().size() == 2);
  auto s1 = ds.batches(5, true, 1), s1b = ds.batches(5, true, 1), s2 = ds.batches(5, true, 2);
  CHECK(s1 == s1b);
  CHECK(s1 != s2);
  std::set<std::size_t> seen;
  for (const auto& b : s1) seen.insert(b.begin(), b.end());
  CHECK(seen.size() == 12);
  auto batch = ds.load(ordered[0], 0);
  CHECK((batch.images.sizes() == torch::IntArrayRef{5, 3, 64, 64}));
  CHECK(batch.targets[TaskId::Ware].size(0) == 5);
  CHECK(batch.targets[TaskId::Type][0].item<std::int64_t>() == ds.labels()[0][3]);

  // Augmented loading depends on (seed, sample, epoch) only.
  spec.augmentation = AugmentSpec{};
  ImageDataset aug(recs, tx, spec, 1);
  CHECK(torch::equal(aug.load_image(4, 2), aug.load_image(4, 2)));
  std::vector<std::size_t> pair{3, 4};
  CHECK(torch::equal(aug.load(pair, 2).images[1], aug.load_image(4, 2)));
}

#include "porcelain/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "porcelain/error.hpp"
#include "porcelain/manifest.hpp"

namespace porcelain {

namespace {

constexpr double kBrightness[2] = {1.0, 0.5};

bool border_pattern_on(int pattern, int x, int y, int side) {
  const int p = std::max(2, side / 16);
  switch (pattern) {
    case 0: return false;
    case 1: return true;
    case 2: return (y / p) % 2 == 0;
    case 3: return (x / p) % 2 == 0;
    case 4: return ((x / p) + (y / p)) % 2 == 0;
    case 5: return ((x + y) / p) % 2 == 0;
    case 6: return (x % (2 * p)) < p / 2 + 1 && (y % (2 * p)) < p / 2 + 1;
    case 7: return (y / (2 * p)) % 2 == 0;
    case 8: return ((x - y + 4 * side) / p) % 2 == 0;
    case 9: return ((x / (2 * p)) + (y / (2 * p))) % 2 == 0;
    default: return false;
  }
}

std::vector<cv::Point> regular_polygon(cv::Point2d c, double r, int n, double phase) {
  std::vector<cv::Point> pts;
  for (int i = 0; i < n; ++i) {
    double a = phase + 2.0 * std::numbers::pi * i / n;
    pts.emplace_back(static_cast<int>(std::lround(c.x + r * std::cos(a))),
                     static_cast<int>(std::lround(c.y + r * std::sin(a))));
  }
  return pts;
}

void draw_shape(cv::Mat& img, int shape, cv::Point2d c, double r, const cv::Scalar& fill) {
  const double pi = std::numbers::pi;
  const int thick = std::max(2, static_cast<int>(r / 3));
  auto poly = [&](const std::vector<cv::Point>& pts) {
    std::vector<std::vector<cv::Point>> all{pts};
    cv::fillPoly(img, all, fill, cv::LINE_AA);
  };
  cv::Point ci(static_cast<int>(std::lround(c.x)), static_cast<int>(std::lround(c.y)));
  int ri = static_cast<int>(std::lround(r));
  // Shapes differ in area and topology as well as outline, and each maps to
  // itself under a horizontal mirror so augmentation never swaps classes.
  switch (shape) {
    case 0: cv::circle(img, ci, ri, fill, cv::FILLED, cv::LINE_AA); break;                  // disk
    case 1: cv::circle(img, ci, ri / 2, fill, cv::FILLED, cv::LINE_AA); break;              // small disk
    case 2: cv::circle(img, ci, ri, fill, thick, cv::LINE_AA); break;                       // ring
    case 3: poly(regular_polygon(c, r * 1.2, 4, pi / 4)); break;                            // square
    case 4:                                                                                 // square outline
      cv::rectangle(img, cv::Rect(ci.x - ri, ci.y - ri, 2 * ri, 2 * ri), fill, thick);
      break;
    case 5: poly(regular_polygon(c, r * 1.2, 3, -pi / 2)); break;                           // triangle up
    case 6: poly(regular_polygon(c, r * 1.2, 3, pi / 2)); break;                            // triangle down
    case 7:                                                                                 // plus
      cv::rectangle(img, cv::Rect(ci.x - ri, ci.y - thick / 2, 2 * ri, thick), fill, cv::FILLED);
      cv::rectangle(img, cv::Rect(ci.x - thick / 2, ci.y - ri, thick, 2 * ri), fill, cv::FILLED);
      break;
    case 8:                                                                                 // X
      cv::line(img, {ci.x - ri, ci.y - ri}, {ci.x + ri, ci.y + ri}, fill, thick, cv::LINE_AA);
      cv::line(img, {ci.x - ri, ci.y + ri}, {ci.x + ri, ci.y - ri}, fill, thick, cv::LINE_AA);
      break;
    case 9: cv::rectangle(img, cv::Rect(ci.x - ri, ci.y - ri / 3, 2 * ri, 2 * (ri / 3)), fill, cv::FILLED); break;
    case 10: cv::rectangle(img, cv::Rect(ci.x - ri / 3, ci.y - ri, 2 * (ri / 3), 2 * ri), fill, cv::FILLED); break;
    case 11:                                                                                // two disks
      cv::circle(img, {ci.x - ri / 2 - 1, ci.y}, ri / 2, fill, cv::FILLED, cv::LINE_AA);
      cv::circle(img, {ci.x + ri / 2 + 1, ci.y}, ri / 2, fill, cv::FILLED, cv::LINE_AA);
      break;
    default: break;
  }
}

}  // namespace

cv::Mat render_synthetic_image(const EncodedLabels& labels, std::uint64_t seed, const SyntheticOptions& opts) {
  const int side = opts.image_side;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);

  const auto dynasty = labels[task_index(TaskId::Dynasty)];
  const auto ware = labels[task_index(TaskId::Ware)];
  const auto glaze = labels[task_index(TaskId::Glaze)];
  const auto type = labels[task_index(TaskId::Type)];

  // Background hue: eight evenly spaced hues on OpenCV's 0..180 scale.
  cv::Mat hsv(side, side, CV_8UC3, cv::Scalar(static_cast<double>(glaze) * 180.0 / 8.0, 200, 230));
  cv::Mat img;
  cv::cvtColor(hsv, img, cv::COLOR_HSV2RGB);

  const int border = std::max(4, side / 6);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      bool in_border = x < border || y < border || x >= side - border || y >= side - border;
      if (!in_border) continue;
      auto v = border_pattern_on(static_cast<int>(ware), x, y, side) ? 255 : 0;
      img.at<cv::Vec3b>(y, x) = cv::Vec3b(v, v, v);
    }
  }

  const double inner = side - 2.0 * border;
  cv::Point2d centre(side / 2.0 + jitter(rng) * side * 0.03, side / 2.0 + jitter(rng) * side * 0.03);
  double radius = inner * 0.34 * (1.0 + 0.06 * jitter(rng));
  // Dark on a bright background: contrast does not depend on the hue.
  draw_shape(img, static_cast<int>(type), centre, radius, cv::Scalar(20, 20, 20));

  cv::Mat f;
  img.convertTo(f, CV_32FC3, kBrightness[dynasty]);
  cv::Mat noise(side, side, CV_32FC3);
  cv::RNG cvrng(static_cast<std::uint64_t>(rng()));
  cvrng.fill(noise, cv::RNG::NORMAL, 0.0, opts.noise_sigma);
  f += noise;
  cv::Mat out;
  f.convertTo(out, CV_8UC3);
  return out;
}

std::filesystem::path generate_synthetic_dataset(std::size_t n_samples, std::uint64_t seed,
                                                 const std::filesystem::path& out_dir,
                                                 const SyntheticOptions& opts) {
  if (n_samples < 12) throw Error(ErrorCode::InvalidSpec, "synthetic datasets need at least 12 samples");
  const auto& taxonomy = build_taxonomy();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "images", ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + (out_dir / "images").string() + ": " + ec.message());

  std::mt19937_64 rng(seed);
  std::vector<SampleRecord> records;
  records.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    EncodedLabels enc{};
    SampleRecord r;
    for (auto t : kAllTasks) {
      std::uniform_int_distribution<std::int64_t> pick(0, static_cast<std::int64_t>(taxonomy.task(t).size()) - 1);
      enc[task_index(t)] = pick(rng);
      r.labels[task_index(t)] = decode_label(taxonomy, t, enc[task_index(t)]);
    }
    char name[32];
    std::snprintf(name, sizeof(name), "syn-%05zu", i);
    r.sample_id = name;
    r.image_path = out_dir / "images" / (r.sample_id + ".png");
    cv::Mat rgb = render_synthetic_image(enc, rng(), opts);
    cv::Mat bgr;
    cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
    if (!cv::imwrite(r.image_path.string(), bgr)) {
      throw Error(ErrorCode::IoError, "cannot write " + r.image_path.string());
    }
    records.push_back(std::move(r));
  }
  auto manifest = out_dir / "manifest.csv";
  write_manifest(manifest, records);
  return manifest;
}

}  // namespace porcelain

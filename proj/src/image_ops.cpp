#include "porcelain/image_ops.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "porcelain/error.hpp"

namespace porcelain {

void AugmentSpec::validate() const {
  if (!(horizontal_flip_prob >= 0.0 && horizontal_flip_prob <= 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "horizontal_flip_prob must lie in [0, 1]");
  }
  if (!(rotation_max_degrees >= 0.0)) {
    throw Error(ErrorCode::InvalidSpec, "rotation_max_degrees must be >= 0");
  }
}

void PreprocessSpec::validate() const {
  if (target_side < 64) throw Error(ErrorCode::InvalidSpec, "target_side must be >= 64");
  for (float s : channel_stds) {
    if (!(s > 0.0f)) throw Error(ErrorCode::InvalidSpec, "channel stds must be strictly positive");
  }
  if (augmentation) augmentation->validate();
}

cv::Mat decode_image(const std::filesystem::path& path) {
  // IMREAD_COLOR applies EXIF orientation and expands grayscale to 3 channels.
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw Error(ErrorCode::UndecodableImage, "cannot decode " + path.string());
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  return rgb;
}

cv::Mat resize_square(const cv::Mat& rgb, int side) {
  if (rgb.empty() || rgb.rows < 1 || rgb.cols < 1) throw Error(ErrorCode::ZeroSizeImage, "image has no pixels");
  if (rgb.channels() != 3) throw Error(ErrorCode::UndecodableImage, "expected a 3-channel image");
  if (rgb.rows == side && rgb.cols == side) return rgb;
  cv::Mat out;
  int interp = (rgb.rows > side || rgb.cols > side) ? cv::INTER_AREA : cv::INTER_LINEAR;
  cv::resize(rgb, out, cv::Size(side, side), 0, 0, interp);
  return out;
}

torch::Tensor preprocess_image(const cv::Mat& rgb, const PreprocessSpec& spec) {
  cv::Mat sq = resize_square(rgb, spec.target_side);
  cv::Mat f;
  sq.convertTo(f, CV_32FC3, 1.0 / 255.0);
  if (!f.isContinuous()) f = f.clone();
  auto hwc = torch::from_blob(f.data, {spec.target_side, spec.target_side, 3}, torch::kFloat32);
  auto chw = hwc.permute({2, 0, 1}).clone();
  auto mean = torch::tensor({spec.channel_means[0], spec.channel_means[1], spec.channel_means[2]}).view({3, 1, 1});
  auto std = torch::tensor({spec.channel_stds[0], spec.channel_stds[1], spec.channel_stds[2]}).view({3, 1, 1});
  return (chw - mean) / std;
}

cv::Mat augment_image(const cv::Mat& rgb, const AugmentSpec& spec, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  cv::Mat out = rgb.clone();
  // Draws happen unconditionally so the random stream does not depend on the spec.
  const bool flip = unit(rng) < spec.horizontal_flip_prob;
  const double angle = (2.0 * unit(rng) - 1.0) * spec.rotation_max_degrees;
  if (flip) cv::flip(out, out, 1);
  if (angle != 0.0) {
    cv::Point2f centre(static_cast<float>(out.cols - 1) / 2.0f, static_cast<float>(out.rows - 1) / 2.0f);
    cv::Mat rot = cv::getRotationMatrix2D(centre, angle, 1.0);
    cv::Mat rotated;
    cv::warpAffine(out, rotated, rot, out.size(), cv::INTER_LINEAR, cv::BORDER_CONSTANT, cv::Scalar::all(0));
    out = rotated;
  }
  return out;
}

}  // namespace porcelain

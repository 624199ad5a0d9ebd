// Copyright 2026 The id-kit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "idkit/dataset/detector.hpp"

#include <algorithm>
#include <numbers>

#include <opencv2/imgproc.hpp>

#include "idkit/core/error.hpp"

namespace idkit {

DiskDetector::DiskDetector(double threshold, int min_area) : threshold_(threshold), min_area_(min_area) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ArgumentError("detector threshold must be in (0, 1)");
  if (min_area < 1) throw ArgumentError("detector min_area must be positive");
}

std::vector<FaceBox> DiskDetector::detect(const Image& frame) const {
  cv::Mat mask(frame.height, frame.width, CV_8U);
  for (int y = 0; y < frame.height; ++y) {
    auto* row = mask.ptr<unsigned char>(y);
    for (int x = 0; x < frame.width; ++x) {
      const float m = std::max({frame.at(y, x, 0), frame.at(y, x, 1), frame.at(y, x, 2)});
      row[x] = m > threshold_ ? 255 : 0;
    }
  }
  cv::Mat labels, stats, centroids;
  const int n = cv::connectedComponentsWithStats(mask, labels, stats, centroids, 8, CV_32S);
  std::vector<FaceBox> boxes;
  for (int i = 1; i < n; ++i) {
    const int area = stats.at<int>(i, cv::CC_STAT_AREA);
    if (area < min_area_) continue;
    FaceBox b;
    b.x0 = stats.at<int>(i, cv::CC_STAT_LEFT);
    b.y0 = stats.at<int>(i, cv::CC_STAT_TOP);
    b.x1 = b.x0 + stats.at<int>(i, cv::CC_STAT_WIDTH);
    b.y1 = b.y0 + stats.at<int>(i, cv::CC_STAT_HEIGHT);
    const double disk = std::numbers::pi / 4.0 * b.width() * b.height();
    b.confidence = std::min(1.0, area / disk);
    boxes.push_back(b);
  }
  return boxes;
}

std::vector<FaceBox> detect_faces(const Image& frame, int frame_index, const FaceDetector& detector) {
  if (frame.empty() || !frame.in_unit_range())
    throw ArgumentError("frame " + std::to_string(frame_index) + " is empty or outside [0, 1]");
  std::vector<FaceBox> boxes;
  try {
    boxes = detector.detect(frame);
  } catch (const std::exception& e) {
    throw BackendError(detector.name(), "frame " + std::to_string(frame_index) + ": " + e.what());
  }
  for (auto& b : boxes) {
    b.frame_index = frame_index;
    if (!b.valid_for(frame.width, frame.height))
      throw BackendError(detector.name(), "frame " + std::to_string(frame_index) + ": invalid box");
  }
  std::stable_sort(boxes.begin(), boxes.end(), [](const FaceBox& a, const FaceBox& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.y0 != b.y0) return a.y0 < b.y0;
    return a.x0 < b.x0;
  });
  return boxes;
}

}  // namespace idkit

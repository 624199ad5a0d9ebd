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

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "idkit/core/image.hpp"
#include "idkit/dataset/types.hpp"

namespace idkit {

class FaceDetector {
 public:
  virtual ~FaceDetector() = default;
  virtual std::string name() const = 0;
  // Boxes in any order; frame_index is filled in by detect_faces.
  virtual std::vector<FaceBox> detect(const Image& frame) const = 0;
};

// Finds the bright disks planted by the synthetic corpus: pixels whose
// largest channel exceeds `threshold`, grouped into 8-connected components of
// at least `min_area` pixels. Confidence is the fill ratio of the component
// against a disk inscribed in its bounding box.
class DiskDetector : public FaceDetector {
 public:
  explicit DiskDetector(double threshold = 0.7, int min_area = 6);
  std::string name() const override { return "disk"; }
  std::vector<FaceBox> detect(const Image& frame) const override;

 private:
  double threshold_;
  int min_area_;
};

// Sorted by confidence, highest first (ties by position). Backend failures
// become BackendError naming the frame index.
std::vector<FaceBox> detect_faces(const Image& frame, int frame_index, const FaceDetector& detector);

}  // namespace idkit

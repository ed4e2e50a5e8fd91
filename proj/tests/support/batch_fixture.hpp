// Copyright 2026 The STAR Authors.
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

#include <filesystem>
#include <string>
#include <vector>

#include "star/batch.hpp"
#include "synth.hpp"

namespace star::testing {

/// Run settings scaled for the 1024^2 fixture slides.
inline RunConfig fixture_config(const std::filesystem::path& dir, const std::vector<std::filesystem::path>& targets,
                                const std::filesystem::path& out) {
  RunConfig c;
  c.reference_path = (dir / "ref.png").string();
  for (const auto& t : targets) c.target_paths.push_back(t.string());
  c.out_dir = out.string();
  c.downsample = 8;
  c.vis_downsample = 4;
  c.tile_size = 64;
  c.patch = 16;
  c.patch_stride = 4;
  return c;
}

/// Reference plus two moved copies, written once per process.
struct BatchFixture {
  std::filesystem::path dir;
  std::vector<std::filesystem::path> targets;
  std::vector<FixtureTarget> truth{{25.0, 30.0, -40.0}, {200.0, -50.0, 20.0}};

  explicit BatchFixture(const std::string& name) {
    dir = scratch_dir(name);
    targets = write_batch_fixture(dir, truth);
  }
};

}  // namespace star::testing

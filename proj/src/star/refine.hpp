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
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "star/compose.hpp"

namespace star {

inline constexpr int kMaxGridShift = 100;

enum class CaseState { kClean, kShifted, kCommitted };
const char* case_state_name(CaseState state);

struct CaseRecord {
  std::string case_id;
  Sidecar sidecar;
  std::string reference_thumb;
  std::string aligned_thumb;
  std::string overlay;
  CaseState state = CaseState::kClean;
  bool low_qa = false;
};

nlohmann::ordered_json case_record_to_json(const CaseRecord& record);

/// Translates the footprint by shift * grid_unit thumbnail pixels and
/// accumulates the shift. A zero shift returns the input unchanged.
/// Throws OutOfCanvas when the footprint no longer touches \`canvas\`, and
/// InvalidArgument when a component exceeds kMaxGridShift.
Sidecar apply_grid_shift(const Sidecar& sidecar, GridShift shift, int grid_unit, Dims canvas);

struct HttpReply {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// HTTP-independent core of the refinement service. Each case lives in its
/// own directory under \`cases_dir\` (as written by run_batch). Mutations of
/// one case are serialized; different cases proceed independently.
class RefineService {
 public:
  explicit RefineService(std::filesystem::path cases_dir);

  std::vector<std::string> case_ids() const;

  HttpReply list_cases();
  HttpReply get_case(const std::string& id);
  HttpReply image(const std::string& id, const std::string& layer);
  HttpReply shift(const std::string& id, const std::string& body);
  HttpReply commit(const std::string& id);

 private:
  std::mutex& case_mutex(const std::string& id);
  bool known(const std::string& id) const;
  CaseRecord load(const std::string& id) const;

  std::filesystem::path root_;
  std::mutex table_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> case_mutexes_;
};

/// Blocking HTTP server over RefineService.
class RefineServer {
 public:
  explicit RefineServer(std::filesystem::path cases_dir);
  ~RefineServer();
  RefineServer(const RefineServer&) = delete;
  RefineServer& operator=(const RefineServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port or throws IoError.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

void serve(const std::filesystem::path& cases_dir, const std::string& host, int port);

}  // namespace star

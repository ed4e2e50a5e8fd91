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

#include "star/refine.hpp"

#include <fstream>
#include <sstream>

#include "httplib.h"
#include "star/batch.hpp"
#include "star/error.hpp"
#include "star/slide_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace star {

const char* case_state_name(CaseState state) {
  switch (state) {
    case CaseState::kShifted: return "shifted";
    case CaseState::kCommitted: return "committed";
    case CaseState::kClean: break;
  }
  return "clean";
}

namespace {

CaseState parse_state(const std::string& s) {
  if (s == "clean") return CaseState::kClean;
  if (s == "shifted") return CaseState::kShifted;
  if (s == "committed") return CaseState::kCommitted;
  fail(ErrorCode::kSchemaError, "unknown case state '" + s + "'");
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::kSchemaError, path.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const json& j) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIoError, "cannot write " + tmp.string());
    out << j.dump(2) << '\n';
  }
  fs::rename(tmp, path);
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

HttpReply json_reply(int status, const ojson& body) { return {status, "application/json", body.dump()}; }

HttpReply error_reply(int status, const std::string& message) {
  return json_reply(status, ojson{{"error", message}});
}

int http_status(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kOutOfCanvas:
    case ErrorCode::kSchemaError: return 422;
    default: return 500;
  }
}

template <typename Fn>
HttpReply guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return error_reply(http_status(e), e.what());
  } catch (const std::exception& e) {
    return error_reply(500, e.what());
  }
}

const char* kRefThumb = "reference_thumb.png";
const char* kAlignedThumb = "aligned_thumb.png";
const char* kOverlay = "overlay.png";

}  // namespace

ojson case_record_to_json(const CaseRecord& r) {
  return ojson{{"case_id", r.case_id},
               {"state", case_state_name(r.state)},
               {"low_qa", r.low_qa},
               {"sidecar", sidecar_to_json(r.sidecar)},
               {"thumbs", {{"reference", r.reference_thumb}, {"aligned", r.aligned_thumb}, {"overlay", r.overlay}}}};
}

Sidecar apply_grid_shift(const Sidecar& sidecar, GridShift shift, int grid_unit, Dims canvas) {
  if (grid_unit < 1) fail(ErrorCode::kInvalidArgument, "grid unit must be >= 1");
  if (std::abs(shift.d_rows) > kMaxGridShift || std::abs(shift.d_cols) > kMaxGridShift) {
    fail(ErrorCode::kInvalidArgument, "grid shift component exceeds " + std::to_string(kMaxGridShift));
  }
  if (shift == GridShift{}) return sidecar;
  Sidecar out = sidecar;
  out.grid_shift.d_rows += shift.d_rows;
  out.grid_shift.d_cols += shift.d_cols;
  if (std::abs(out.grid_shift.d_rows) > kMaxGridShift || std::abs(out.grid_shift.d_cols) > kMaxGridShift) {
    fail(ErrorCode::kInvalidArgument, "accumulated grid shift exceeds " + std::to_string(kMaxGridShift));
  }
  out.row += shift.d_rows * grid_unit;
  out.col += shift.d_cols * grid_unit;
  const bool touches = out.row < canvas.rows && out.row + out.template_rows > 0 && out.col < canvas.cols &&
                       out.col + out.template_cols > 0;
  if (!touches) fail(ErrorCode::kOutOfCanvas, "shifted footprint leaves the target thumbnail");
  out.refined = true;
  return out;
}

RefineService::RefineService(fs::path cases_dir) : root_(std::move(cases_dir)) {
  if (!fs::is_directory(root_)) fail(ErrorCode::kFileNotFound, "cases directory not found: " + root_.string());
}

std::vector<std::string> RefineService::case_ids() const {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(root_)) {
    if (!entry.is_directory()) continue;
    if (fs::exists(entry.path() / "params.json") && fs::exists(entry.path() / "case.json")) {
      ids.push_back(entry.path().filename().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

bool RefineService::known(const std::string& id) const {
  if (id.empty() || id == "." || id == ".." || id.find('/') != std::string::npos ||
      id.find('\\') != std::string::npos) {
    return false;
  }
  const fs::path dir = root_ / id;
  return fs::exists(dir / "params.json") && fs::exists(dir / "case.json");
}

std::mutex& RefineService::case_mutex(const std::string& id) {
  std::lock_guard<std::mutex> lock(table_mutex_);
  auto& slot = case_mutexes_[id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

CaseRecord RefineService::load(const std::string& id) const {
  if (!known(id)) fail(ErrorCode::kNotFound, "unknown case '" + id + "'");
  const fs::path dir = root_ / id;
  const json info = read_json_file(dir / "case.json");
  CaseRecord r;
  r.case_id = id;
  r.sidecar = read_sidecar(dir / "params.json");
  r.reference_thumb = kRefThumb;
  r.aligned_thumb = kAlignedThumb;
  r.overlay = kOverlay;
  r.state = parse_state(info.value("state", std::string("clean")));
  r.low_qa = r.sidecar.qa < info.value("qa_threshold", 0.2);
  return r;
}

HttpReply RefineService::list_cases() {
  return guarded([&] {
    ojson list = ojson::array();
    for (const auto& id : case_ids()) {
      std::lock_guard<std::mutex> lock(case_mutex(id));
      list.push_back(case_record_to_json(load(id)));
    }
    return json_reply(200, list);
  });
}

HttpReply RefineService::get_case(const std::string& id) {
  return guarded([&] {
    if (!known(id)) fail(ErrorCode::kNotFound, "unknown case '" + id + "'");
    std::lock_guard<std::mutex> lock(case_mutex(id));
    return json_reply(200, case_record_to_json(load(id)));
  });
}

HttpReply RefineService::image(const std::string& id, const std::string& layer) {
  return guarded([&] {
    if (!known(id)) fail(ErrorCode::kNotFound, "unknown case '" + id + "'");
    const char* file = nullptr;
    if (layer == "ref") {
      file = kRefThumb;
    } else if (layer == "aligned") {
      file = kAlignedThumb;
    } else if (layer == "overlay") {
      file = kOverlay;
    } else {
      fail(ErrorCode::kInvalidArgument, "layer must be ref, aligned or overlay");
    }
    std::lock_guard<std::mutex> lock(case_mutex(id));
    return HttpReply{200, "image/png", read_bytes(root_ / id / file)};
  });
}

HttpReply RefineService::shift(const std::string& id, const std::string& body) {
  return guarded([&] {
    if (!known(id)) fail(ErrorCode::kNotFound, "unknown case '" + id + "'");
    json payload;
    try {
      payload = json::parse(body);
    } catch (const json::exception&) {
      fail(ErrorCode::kInvalidArgument, "shift body is not valid JSON");
    }
    if (!payload.is_object() || payload.size() != 2 || !payload.contains("d_rows") || !payload.contains("d_cols") ||
        !payload["d_rows"].is_number_integer() || !payload["d_cols"].is_number_integer()) {
      fail(ErrorCode::kInvalidArgument, R"(shift body must be {"d_rows": int, "d_cols": int})");
    }
    const auto dr = payload["d_rows"].get<std::int64_t>();
    const auto dc = payload["d_cols"].get<std::int64_t>();
    if (std::abs(dr) > kMaxGridShift || std::abs(dc) > kMaxGridShift) {
      fail(ErrorCode::kInvalidArgument, "grid shift component exceeds " + std::to_string(kMaxGridShift));
    }
    const GridShift delta{static_cast<int>(dr), static_cast<int>(dc)};

    std::lock_guard<std::mutex> lock(case_mutex(id));
    const fs::path dir = root_ / id;
    json info = read_json_file(dir / "case.json");
    const CaseRecord rec = load(id);
    if (rec.state == CaseState::kCommitted) fail(ErrorCode::kConflict, "case '" + id + "' is committed");

    const int d = rec.sidecar.downsample;
    const int grid_unit = info.at("tile_size").get<int>() / d;
    const Dims canvas{info.at("target_rows").get<int>(), info.at("target_cols").get<int>()};
    const Sidecar next = apply_grid_shift(rec.sidecar, delta, grid_unit, canvas);
    if (next == rec.sidecar) return json_reply(200, sidecar_to_json(next));

    const int vis = info.at("vis_downsample").get<int>();
    const RgbImage target_vis = read_image_rgb(dir / "target_thumb.png");
    const RgbImage aligned = apply_rigid_scaled(target_vis, vis, rigid_from_sidecar(next),
                                                Dims{next.template_rows, next.template_cols});
    const OverlaySpec spec{std::max(2, info.at("tile_size").get<int>() / vis), 0};
    write_image(dir / kAlignedThumb, aligned);
    write_image(dir / kOverlay, render_divider_overlay(aligned, spec));
    write_sidecar(next, dir / "params.json");
    info["state"] = case_state_name(CaseState::kShifted);
    write_json_file(dir / "case.json", info);
    return json_reply(200, sidecar_to_json(next));
  });
}

HttpReply RefineService::commit(const std::string& id) {
  return guarded([&] {
    if (!known(id)) fail(ErrorCode::kNotFound, "unknown case '" + id + "'");
    std::lock_guard<std::mutex> lock(case_mutex(id));
    const fs::path dir = root_ / id;
    json info = read_json_file(dir / "case.json");
    const CaseRecord rec = load(id);
    if (rec.state == CaseState::kCommitted) fail(ErrorCode::kConflict, "case '" + id + "' is already committed");

    const SlideSource target = open_slide(info.at("target_path").get<std::string>());
    const RgbImage native = apply_rigid_native(target, rigid_from_sidecar(rec.sidecar),
                                               Dims{rec.sidecar.template_rows, rec.sidecar.template_cols});
    const fs::path tmp = dir / "aligned_native.tiff.tmp";
    write_tiff(tmp, native);
    fs::rename(tmp, dir / "aligned_native.tiff");
    if (fs::exists(dir / "tiles")) tile_case(dir);
    info["state"] = case_state_name(CaseState::kCommitted);
    write_json_file(dir / "case.json", info);
    return json_reply(200, ojson{{"status", "committed"}});
  });
}

struct RefineServer::Impl {
  RefineService service;
  httplib::Server http;

  explicit Impl(fs::path dir) : service(std::move(dir)) {}
};

namespace {

void send(httplib::Response& res, const HttpReply& reply) {
  res.status = reply.status;
  res.set_content(reply.body, reply.content_type);
}

}  // namespace

RefineServer::RefineServer(fs::path cases_dir) : impl_(std::make_unique<Impl>(std::move(cases_dir))) {
  auto& http = impl_->http;
  auto& svc = impl_->service;
  http.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  http.Get("/cases", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.list_cases()); });
  http.Get(R"(/cases/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.get_case(req.matches[1]));
  });
  http.Get(R"(/cases/([^/]+)/image)", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.image(req.matches[1], req.get_param_value("layer")));
  });
  http.Post(R"(/cases/([^/]+)/shift)", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.shift(req.matches[1], req.body));
  });
  http.Post(R"(/cases/([^/]+)/commit)", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.commit(req.matches[1]));
  });
  http.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
}

RefineServer::~RefineServer() { stop(); }

int RefineServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->http.bind_to_any_port(host);
    if (bound < 0) fail(ErrorCode::kIoError, "cannot bind " + host);
    return bound;
  }
  if (!impl_->http.bind_to_port(host, port)) {
    fail(ErrorCode::kIoError, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void RefineServer::listen() { impl_->http.listen_after_bind(); }

void RefineServer::stop() {
  if (impl_) impl_->http.stop();
}

void serve(const fs::path& cases_dir, const std::string& host, int port) {
  RefineServer server(cases_dir);
  server.bind(host, port);
  server.listen();
}

}  // namespace star

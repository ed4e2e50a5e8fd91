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

#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "batch_fixture.hpp"
#include "doctest.h"
#include "expect.hpp"
#include "httplib.h"
#include "star/compose.hpp"
#include "star/error.hpp"
#include "star/refine.hpp"
#include "star/slide_io.hpp"

using namespace star;
using star::testing::code_of;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
  }
  return files;
}

// One batch run shared by the suite; each test works on its own copy.
const fs::path& base_cases() {
  static const fs::path out = [] {
    const testing::BatchFixture fx("refine_fixture");
    const fs::path o = fx.dir / "out";
    RunConfig c = testing::fixture_config(fx.dir, fx.targets, o);
    c.do_tiling = true;
    run_batch(c);
    return o;
  }();
  return out;
}

fs::path fresh_cases(const std::string& name) {
  const fs::path dir = testing::scratch_dir(name);
  fs::copy(base_cases(), dir, fs::copy_options::recursive);
  return dir;
}

Sidecar at(int row, int col) {
  Sidecar s;
  s.reference_id = "r";
  s.target_id = "t";
  s.downsample = 32;
  s.row = row;
  s.col = col;
  s.template_rows = 20;
  s.template_cols = 30;
  return s;
}

json body_of(const HttpReply& r) { return json::parse(r.body); }

}  // namespace

TEST_SUITE("refine") {
  TEST_CASE("grid shift arithmetic") {
    const Dims canvas{500, 500};
    const Sidecar s = at(40, 70);
    const Sidecar moved = apply_grid_shift(s, {1, -2}, 8, canvas);
    CHECK(moved.row == 48);
    CHECK(moved.col == 54);
    CHECK(moved.refined);
    CHECK(moved.grid_shift == GridShift{1, -2});
    CHECK(moved.theta_deg == s.theta_deg);

    CHECK(apply_grid_shift(s, {0, 0}, 8, canvas) == s);

    const Sidecar back = apply_grid_shift(apply_grid_shift(s, {1, 0}, 8, canvas), {-1, 0}, 8, canvas);
    CHECK(back.row == 40);
    CHECK(back.col == 70);
    CHECK(back.grid_shift == GridShift{0, 0});
    CHECK(sidecar_from_json(sidecar_to_json(back)) == back);
  }

  TEST_CASE("grid shift limits") {
    const Sidecar s = at(40, 70);
    CHECK(code_of([&] { apply_grid_shift(s, {10, 0}, 8, {100, 100}); }) == ErrorCode::kOutOfCanvas);
    CHECK(code_of([&] { apply_grid_shift(s, {0, -13}, 8, {100, 100}); }) == ErrorCode::kOutOfCanvas);
    // Partial overlap is still allowed.
    CHECK(apply_grid_shift(s, {7, 0}, 8, {100, 100}).row == 96);
    CHECK(code_of([&] { apply_grid_shift(s, {101, 0}, 1, {9999, 9999}); }) == ErrorCode::kInvalidArgument);
    const Sidecar far = apply_grid_shift(s, {0, 100}, 1, {9999, 9999});
    CHECK(code_of([&] { apply_grid_shift(far, {0, 1}, 1, {9999, 9999}); }) == ErrorCode::kInvalidArgument);
    CHECK(code_of([&] { apply_grid_shift(s, {1, 0}, 0, {100, 100}); }) == ErrorCode::kInvalidArgument);
  }

  TEST_CASE("listing and reading cases") {
    const fs::path dir = fresh_cases("refine_list");
    RefineService svc(dir);
    CHECK(svc.case_ids() == std::vector<std::string>{"t0", "t1"});
    const HttpReply list = svc.list_cases();
    CHECK(list.status == 200);
    CHECK(list.content_type == "application/json");
    const json j = body_of(list);
    REQUIRE(j.is_array());
    CHECK(j.size() == 2);
    CHECK(j[0]["case_id"] == "t0");
    CHECK(j[0]["state"] == "clean");
    CHECK(j[0]["sidecar"]["version"] == 1);

    const HttpReply one = svc.get_case("t1");
    CHECK(one.status == 200);
    CHECK(body_of(one)["sidecar"]["target_id"] == "t1");

    for (const char* layer : {"ref", "aligned", "overlay"}) {
      const HttpReply img = svc.image("t0", layer);
      CHECK(img.status == 200);
      CHECK(img.content_type == "image/png");
      CHECK(img.body.rfind("\x89PNG", 0) == 0);
    }
    CHECK(svc.image("t0", "mask").status == 422);
  }

  TEST_CASE("unknown cases") {
    const fs::path dir = fresh_cases("refine_404");
    RefineService svc(dir);
    CHECK(svc.get_case("nope").status == 404);
    CHECK(svc.get_case("reference").status == 404);
    CHECK(svc.get_case("cache").status == 404);
    CHECK(svc.get_case("../out").status == 404);
    CHECK(svc.image("nope", "ref").status == 404);
    CHECK(svc.shift("nope", R"({"d_rows":1,"d_cols":0})").status == 404);
    CHECK(svc.commit("nope").status == 404);
    CHECK(body_of(svc.commit("nope")).contains("error"));
  }

  TEST_CASE("reads do not mutate") {
    const fs::path dir = fresh_cases("refine_get");
    RefineService svc(dir);
    const auto before = snapshot(dir);
    svc.list_cases();
    svc.get_case("t0");
    for (const char* layer : {"ref", "aligned", "overlay"}) svc.image("t1", layer);
    svc.get_case("nope");
    CHECK(snapshot(dir) == before);
  }

  TEST_CASE("shifts accumulate and re-render") {
    const fs::path dir = fresh_cases("refine_shift");
    RefineService svc(dir);
    const Sidecar orig = read_sidecar(dir / "t0" / "params.json");
    const std::string overlay0 = slurp(dir / "t0" / "overlay.png");
    const std::string aligned0 = slurp(dir / "t0" / "aligned_thumb.png");
    const int unit = 64 / 8;

    HttpReply r = svc.shift("t0", R"({"d_rows":1,"d_cols":-2})");
    CHECK(r.status == 200);
    const Sidecar s1 = sidecar_from_json(body_of(r));
    CHECK(s1.row == orig.row + unit);
    CHECK(s1.col == orig.col - 2 * unit);
    CHECK(s1.grid_shift == GridShift{1, -2});
    CHECK(read_sidecar(dir / "t0" / "params.json") == s1);
    CHECK(body_of(svc.get_case("t0"))["state"] == "shifted");
    CHECK(slurp(dir / "t0" / "overlay.png") != overlay0);

    r = svc.shift("t0", R"({"d_rows":2,"d_cols":0})");
    CHECK(r.status == 200);
    CHECK(sidecar_from_json(body_of(r)).grid_shift == GridShift{3, -2});

    r = svc.shift("t0", R"({"d_rows":-3,"d_cols":2})");
    CHECK(r.status == 200);
    const Sidecar back = sidecar_from_json(body_of(r));
    CHECK(back.row == orig.row);
    CHECK(back.col == orig.col);
    CHECK(back.grid_shift == GridShift{0, 0});
    CHECK(slurp(dir / "t0" / "overlay.png") == overlay0);
    CHECK(slurp(dir / "t0" / "aligned_thumb.png") == aligned0);
    // The other case is untouched.
    CHECK(body_of(svc.get_case("t1"))["state"] == "clean");
  }

  TEST_CASE("invalid shift payloads") {
    const fs::path dir = fresh_cases("refine_422");
    RefineService svc(dir);
    const auto before = snapshot(dir);
    for (const char* body : {"", "nope", "[1,2]", "{}", R"({"d_rows":1})", R"({"d_rows":1.5,"d_cols":0})",
                             R"({"d_rows":"1","d_cols":0})", R"({"d_rows":1,"d_cols":0,"x":0})",
                             R"({"d_rows":101,"d_cols":0})", R"({"d_rows":0,"d_cols":-101})",
                             R"({"d_rows":100,"d_cols":0})"}) {
      INFO(body);
      CHECK(svc.shift("t0", body).status == 422);
    }
    CHECK(snapshot(dir) == before);
  }

  TEST_CASE("commit state machine") {
    const fs::path dir = fresh_cases("refine_commit");
    RefineService svc(dir);
    CHECK(svc.shift("t0", R"({"d_rows":0,"d_cols":1})").status == 200);
    const HttpReply c = svc.commit("t0");
    CHECK(c.status == 200);
    CHECK(body_of(c) == json{{"status", "committed"}});
    CHECK(body_of(svc.get_case("t0"))["state"] == "committed");
    CHECK(svc.commit("t0").status == 409);
    CHECK(svc.shift("t0", R"({"d_rows":1,"d_cols":0})").status == 409);

    // Committed export equals a fresh native warp of the refined parameters.
    const Sidecar s = read_sidecar(dir / "t0" / "params.json");
    CHECK(s.refined);
    const json info = json::parse(slurp(dir / "t0" / "case.json"));
    const RgbImage expect = apply_rigid_native(open_slide(info["target_path"].get<std::string>()),
                                               rigid_from_sidecar(s), {s.template_rows, s.template_cols});
    const SlideSource exported = open_slide(dir / "t0" / "aligned_native.tiff");
    CHECK(read_region_native(exported, BBox{0, 0, exported.height(), exported.width()}) == expect);
    // Tiles were regenerated for the refined placement.
    CHECK(fs::exists(dir / "t0" / "tiles" / "manifest.json"));

    // A clean case can be committed directly.
    CHECK(svc.commit("t1").status == 200);
    CHECK(svc.commit("t1").status == 409);
  }

  TEST_CASE("http server") {
    const fs::path dir = fresh_cases("refine_http");
    RefineServer server(dir);
    const int port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread th([&] { server.listen(); });
    httplib::Client cli("127.0.0.1", port);
    cli.set_read_timeout(60, 0);

    auto res = cli.Get("/cases");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body).size() == 2);
    CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");

    res = cli.Get("/cases/t0/image?layer=overlay");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->get_header_value("Content-Type") == "image/png");

    res = cli.Get("/cases/zzz");
    REQUIRE(res);
    CHECK(res->status == 404);

    res = cli.Post("/cases/t0/shift", R"({"d_rows":1,"d_cols":-2})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body)["grid_shift"] == json{{"d_rows", 1}, {"d_cols", -2}});

    res = cli.Post("/cases/t0/shift", R"({"d_rows":"x"})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 422);

    res = cli.Post("/cases/t0/commit", "", "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    res = cli.Post("/cases/t0/commit", "", "application/json");
    REQUIRE(res);
    CHECK(res->status == 409);

    server.stop();
    th.join();
  }
}

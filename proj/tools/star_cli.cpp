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

// star: command-line front end over the C API.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "star/star.h"

namespace {

using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitTargetsFailed = 2;

bool is_config_error(StarStatus s) {
  return s == STAR_INVALID_ARGUMENT || s == STAR_INVALID_STEP || s == STAR_SCHEMA_ERROR;
}

int run_register(const std::string& config_file, json flags) {
  json config = json::object();
  if (!config_file.empty()) {
    std::ifstream in(config_file);
    if (!in) {
      std::fprintf(stderr, "star: cannot read config %s\n", config_file.c_str());
      return kExitUsage;
    }
    try {
      config = json::parse(in);
    } catch (const json::exception& e) {
      std::fprintf(stderr, "star: bad config %s: %s\n", config_file.c_str(), e.what());
      return kExitUsage;
    }
    if (!config.is_object()) {
      std::fprintf(stderr, "star: config must be a JSON object\n");
      return kExitUsage;
    }
  }
  for (auto& [key, value] : flags.items()) config[key] = value;

  char* report_text = nullptr;
  const StarStatus st = star_run_batch(config.dump().c_str(), &report_text);
  if (st != STAR_OK) {
    std::fprintf(stderr, "star: %s\n", star_last_error());
    return is_config_error(st) ? kExitUsage : kExitTargetsFailed;
  }
  const json report = json::parse(report_text);
  star_string_free(report_text);

  for (const auto& t : report["targets"]) {
    const std::string status = t["status"];
    if (t["result"].is_null()) {
      std::printf("%-24s %-7s %s\n", t["target_id"].get<std::string>().c_str(), status.c_str(),
                  t.value("error", std::string()).c_str());
    } else {
      const auto& r = t["result"];
      std::printf("%-24s %-7s theta=%6.1f row=%5d col=%5d qa=%.3f (%.2fs)\n",
                  t["target_id"].get<std::string>().c_str(), status.c_str(), r["theta_deg"].get<double>(),
                  r["row"].get<int>(), r["col"].get<int>(), t["qa"].get<double>(), t["wall_time"].get<double>());
    }
  }
  const auto& totals = report["totals"];
  std::printf("ok=%d low_qa=%d failed=%d wall=%.2fs%s\n", totals["ok"].get<int>(), totals["low_qa"].get<int>(),
              totals["failed"].get<int>(), totals["wall_time"].get<double>(),
              report["foreground"]["cached"].get<bool>() ? " (cached mask)" : "");
  return totals["failed"].get<int>() > 0 ? kExitTargetsFailed : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rigid registration of serial-section slide images"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(star_version()));

  auto* reg = app.add_subcommand("register", "Register targets to a reference and export aligned outputs");
  std::string ref, out, config_file;
  std::vector<std::string> targets;
  int downsample = 32, coarse_stride = 10, fine_stride = 1, white = 230, black = 20, tile_size = 256, workers = 1;
  double coarse_angle = 10.0, fine_angle = 1.0, tile_overlap = 0.2, qa_threshold = 0.2;
  bool tile = false;
  std::string method = "auto";
  auto* o_ref = reg->add_option("--ref", ref, "Reference slide (PNG or TIFF)");
  auto* o_targets = reg->add_option("--target", targets, "Target slide(s)");
  auto* o_out = reg->add_option("--out", out, "Output directory");
  auto* o_ds = reg->add_option("--downsample", downsample, "Registration downsample factor");
  auto* o_ca = reg->add_option("--coarse-angle", coarse_angle, "Coarse angle step (degrees)");
  auto* o_fa = reg->add_option("--fine-angle", fine_angle, "Fine angle step (degrees)");
  auto* o_cs = reg->add_option("--coarse-stride", coarse_stride, "Coarse translation stride (pixels)");
  auto* o_fs = reg->add_option("--fine-stride", fine_stride, "Fine translation stride (pixels)");
  auto* o_white = reg->add_option("--white", white, "Upper gray gate");
  auto* o_black = reg->add_option("--black", black, "Lower gray gate");
  auto* o_ts = reg->add_option("--tile-size", tile_size, "Native tile size");
  auto* o_to = reg->add_option("--tile-overlap", tile_overlap, "Tile overlap fraction");
  auto* o_qa = reg->add_option("--qa-threshold", qa_threshold, "Flag targets whose QA falls below this");
  auto* o_tile = reg->add_flag("--tile", tile, "Tile aligned outputs");
  auto* o_workers = reg->add_option("--workers", workers, "Targets processed in parallel");
  auto* o_method = reg->add_option("--method", method, "Correlation method")->check(
      CLI::IsMember({"auto", "direct", "spectral"}));
  reg->add_option("--config", config_file, "JSON config; explicit flags take precedence")->check(CLI::ExistingFile);

  auto* tile_cmd = app.add_subcommand("tile", "Tile an exported case directory");
  std::string case_dir;
  tile_cmd->add_option("--case", case_dir, "Case directory")->required()->check(CLI::ExistingDirectory);

  auto* serve_cmd = app.add_subcommand("serve", "Serve cases for interactive refinement");
  std::string cases_dir, host = "127.0.0.1";
  int port = 8417;
  serve_cmd->add_option("--cases", cases_dir, "Directory of case outputs")->required()->check(
      CLI::ExistingDirectory);
  serve_cmd->add_option("--port", port, "Port")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--host", host, "Bind address");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (reg->parsed()) {
    json flags = json::object();
    auto set_if = [&](CLI::Option* opt, const char* key, const auto& value) {
      if (opt->count() > 0) flags[key] = value;
    };
    set_if(o_ref, "reference_path", ref);
    set_if(o_targets, "target_paths", targets);
    set_if(o_out, "out_dir", out);
    set_if(o_ds, "downsample", downsample);
    set_if(o_ca, "coarse_angle", coarse_angle);
    set_if(o_fa, "fine_angle", fine_angle);
    set_if(o_cs, "coarse_stride", coarse_stride);
    set_if(o_fs, "fine_stride", fine_stride);
    set_if(o_white, "white", white);
    set_if(o_black, "black", black);
    set_if(o_ts, "tile_size", tile_size);
    set_if(o_to, "tile_overlap", tile_overlap);
    set_if(o_qa, "qa_threshold", qa_threshold);
    set_if(o_tile, "do_tiling", tile);
    set_if(o_workers, "workers", workers);
    set_if(o_method, "method", method);
    return run_register(config_file, std::move(flags));
  }

  if (tile_cmd->parsed()) {
    int32_t n = 0;
    if (star_tile_case(case_dir.c_str(), &n) != STAR_OK) {
      std::fprintf(stderr, "star: %s\n", star_last_error());
      return kExitTargetsFailed;
    }
    std::printf("%d tiles written to %s/tiles\n", n, case_dir.c_str());
    return kExitOk;
  }

  std::printf("serving %s on http://%s:%d\n", cases_dir.c_str(), host.c_str(), port);
  std::fflush(stdout);
  if (star_serve(cases_dir.c_str(), host.c_str(), port) != STAR_OK) {
    std::fprintf(stderr, "star: %s\n", star_last_error());
    return kExitUsage;
  }
  return kExitOk;
}

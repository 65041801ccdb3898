// Command-line front end. Talks to the library only through the C API.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "fieldkit/fieldkit.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitAlgorithm = 3;
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

struct Globals {
  std::uint64_t seed = 1;
  std::string config;
  std::string out;
};

// Carries a library status out of a subcommand.
struct Failure {
  fk_status status;
  std::string message;
};

struct InputError {
  std::string message;
};

void check(fk_status s) {
  if (s != FK_OK) throw Failure{s, fk_last_error()};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError{"cannot read '" + path + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_text(const Globals& g) { return g.config.empty() ? std::string() : read_file(g.config); }

// Owns a string returned by the library.
class OwnedString {
 public:
  OwnedString() = default;
  OwnedString(const OwnedString&) = delete;
  OwnedString& operator=(const OwnedString&) = delete;
  ~OwnedString() { fk_string_free(p_); }
  char** put() { return &p_; }
  std::string str() const { return p_ ? p_ : ""; }

 private:
  char* p_ = nullptr;
};

template <typename T, void (*Destroy)(T*)>
class Handle {
 public:
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Destroy(p_); }
  T** put() { return &p_; }
  T* get() const { return p_; }

 private:
  T* p_ = nullptr;
};

using ImageHandle = Handle<fk_image, fk_image_destroy>;
using FieldHandle = Handle<fk_field, fk_field_destroy>;
using PipelineHandle = Handle<fk_pipeline, fk_pipeline_destroy>;

void emit(const Globals& g, const std::string& text) {
  std::string body = text;
  if (body.empty() || body.back() != '\n') body += '\n';
  if (g.out.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw InputError{"cannot write '" + g.out + "'"};
  f << body;
}

// FNV-1a over the pixel bytes, so image-producing commands still print a
// comparable JSON summary.
std::string image_summary(const fk_image* img, const std::string& path) {
  std::uint64_t h = 1469598103934665603ULL;
  const std::size_t n = static_cast<std::size_t>(fk_image_width(img)) * fk_image_height(img) * fk_image_channels(img);
  const std::uint8_t* d = fk_image_const_data(img);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= d[i];
    h *= 1099511628211ULL;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  std::ostringstream s;
  s << "{\n  \"channels\": " << fk_image_channels(img) << ",\n  \"fnv1a\": \"" << hex << "\",\n  \"height\": "
    << fk_image_height(img) << ",\n  \"output\": \"" << path << "\",\n  \"width\": " << fk_image_width(img) << "\n}\n";
  return s.str();
}

void save_image(const fk_image* img, const std::string& path) {
  if (path.empty()) throw InputError{"--out is required for image output"};
  check(fk_image_save(img, path.c_str()));
}

void load_field(const std::string& path, FieldHandle& field) {
  if (path.empty()) {
    check(fk_field_default(field.put()));
  } else {
    check(fk_field_from_json(read_file(path).c_str(), field.put()));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fieldkit: soccer-robot perception and planning toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every randomized step")->capture_default_str();
  app.add_option("--config", g.config, "JSON configuration file");
  app.add_option("--out", g.out, "Output path (stdout for JSON when omitted)");
  std::string field_path;
  app.add_option("--field", field_path, "Field geometry JSON (default layout when omitted)");

  bool dijkstra = false;
  std::string overlay;
  double overlay_mpp = 0.01;
  auto* plan = app.add_subcommand("plan", "Plan a kick sequence to the opponent goal (--config: game state)");
  plan->add_flag("--no-heuristic", dijkstra, "Force the heuristic to zero");
  plan->add_option("--overlay", overlay, "Also draw the plan into this PPM");
  plan->add_option("--overlay-scale", overlay_mpp, "Meters per pixel of the overlay");

  std::string input;
  auto* detect = app.add_subcommand("detect-lines", "Detect field lines and corners (--config: detector settings)");
  detect->add_option("--input", input, "Birdview PPM/PGM")->required();

  auto* birdview = app.add_subcommand("birdview", "Resample a camera image to a top-down view (--config: camera)");
  birdview->add_option("--input", input, "Camera PPM/PGM")->required();

  double k1 = -0.3;
  double k2 = 0.1;
  auto* distort = app.add_subcommand("distort", "Emulate a wide-angle lens on a rectilinear image");
  distort->add_option("--input", input, "Rectilinear PPM/PGM")->required();
  distort->add_option("--k1", k1)->capture_default_str();
  distort->add_option("--k2", k2)->capture_default_str();

  double fov_deg = 90.0;
  auto* mask = app.add_subcommand("mask", "Field-of-view mask (--config: intrinsics)");
  mask->add_option("--fov", fov_deg, "Full field-of-view limit in degrees")->capture_default_str();
  mask->add_option("--input", input, "Apply the mask to this image instead of writing the mask");

  auto* localize = app.add_subcommand("localize", "Run the particle filter over a trajectory (--config: filter)");
  localize->add_option("--input", input, "Trajectory JSON")->required();

  std::string left_path;
  std::string right_path;
  std::string rig_path;
  std::string xyz_path;
  auto* stereo = app.add_subcommand("stereo", "Ground plane and obstacles from a stereo pair (--config: parameters)");
  stereo->add_option("--left", left_path)->required();
  stereo->add_option("--right", right_path)->required();
  stereo->add_option("--rig", rig_path, "Stereo rig JSON");
  stereo->add_option("--xyz", xyz_path, "Write the voxelized cloud as ASCII XYZ");

  std::uint64_t frames = 20;
  int workers = 0;
  bool timing = false;
  auto* bench = app.add_subcommand("pipeline-bench", "Run a pipeline with sleep filters (--config: pipeline)");
  bench->add_option("--frames", frames)->capture_default_str();
  bench->add_option("--workers", workers, "0 picks the default")->capture_default_str();
  bench->add_flag("--include-timing", timing, "Add measured wall times (not reproducible)");

  std::string stereo_rig;
  std::string right_out;
  auto* render = app.add_subcommand("render", "Render a synthetic scene (--config: scene)");
  render->add_option("--stereo-rig", stereo_rig, "Render a stereo pair with this rig JSON");
  render->add_option("--right-out", right_out, "Right image path for a stereo render");

  auto* gen = app.add_subcommand("gen-trajectory", "Generate a synthetic trajectory (--config: generator)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (plan->parsed()) {
      FieldHandle field;
      load_field(field_path, field);
      const std::string request = config_text(g);
      if (request.empty()) throw InputError{"plan needs --config with the game state"};
      OwnedString out;
      check(fk_plan(field.get(), request.c_str(), dijkstra ? 0 : 1, out.put()));
      if (!overlay.empty()) {
        ImageHandle img;
        check(fk_plan_render(field.get(), request.c_str(), dijkstra ? 0 : 1, overlay_mpp, img.put()));
        save_image(img.get(), overlay);
      }
      emit(g, out.str());
    } else if (detect->parsed()) {
      ImageHandle img;
      check(fk_image_load(input.c_str(), img.put()));
      const std::string cfg = config_text(g);
      OwnedString out;
      check(fk_detect_lines(img.get(), cfg.c_str(), g.seed, out.put()));
      emit(g, out.str());
    } else if (birdview->parsed()) {
      ImageHandle img;
      check(fk_image_load(input.c_str(), img.put()));
      const std::string cfg = config_text(g);
      ImageHandle out;
      check(fk_birdview(img.get(), cfg.empty() ? "{}" : cfg.c_str(), out.put()));
      save_image(out.get(), g.out);
      std::cout << image_summary(out.get(), g.out);
    } else if (distort->parsed()) {
      ImageHandle img;
      check(fk_image_load(input.c_str(), img.put()));
      const std::string cfg = config_text(g);
      ImageHandle out;
      check(fk_distort(img.get(), cfg.c_str(), k1, k2, out.put()));
      save_image(out.get(), g.out);
      std::cout << image_summary(out.get(), g.out);
    } else if (mask->parsed()) {
      const std::string cfg = config_text(g);
      ImageHandle m;
      check(fk_fov_mask(cfg.c_str(), fov_deg * kDegToRad, m.put()));
      if (input.empty()) {
        save_image(m.get(), g.out);
        std::cout << image_summary(m.get(), g.out);
      } else {
        ImageHandle img;
        check(fk_image_load(input.c_str(), img.put()));
        check(fk_apply_mask(img.get(), m.get()));
        save_image(img.get(), g.out);
        std::cout << image_summary(img.get(), g.out);
      }
    } else if (localize->parsed()) {
      FieldHandle field;
      load_field(field_path, field);
      const std::string traj = read_file(input);
      const std::string cfg = config_text(g);
      OwnedString out;
      check(fk_localize(field.get(), traj.c_str(), cfg.c_str(), g.seed, out.put()));
      emit(g, out.str());
    } else if (stereo->parsed()) {
      ImageHandle left;
      ImageHandle right;
      check(fk_image_load(left_path.c_str(), left.put()));
      check(fk_image_load(right_path.c_str(), right.put()));
      const std::string rig = rig_path.empty() ? std::string() : read_file(rig_path);
      const std::string cfg = config_text(g);
      OwnedString out;
      OwnedString xyz;
      check(fk_stereo(left.get(), right.get(), rig.c_str(), cfg.c_str(), g.seed, out.put(),
                      xyz_path.empty() ? nullptr : xyz.put()));
      if (!xyz_path.empty()) {
        std::ofstream f(xyz_path, std::ios::binary);
        if (!f) throw InputError{"cannot write '" + xyz_path + "'"};
        f << xyz.str();
      }
      emit(g, out.str());
    } else if (bench->parsed()) {
      if (g.config.empty()) throw InputError{"pipeline-bench needs --config with the pipeline"};
      PipelineHandle p;
      check(fk_pipeline_parse(read_file(g.config).c_str(), p.put()));
      OwnedString out;
      check(fk_pipeline_bench(p.get(), frames, workers, timing ? 1 : 0, out.put()));
      emit(g, out.str());
    } else if (render->parsed()) {
      const std::string cfg = config_text(g);
      if (stereo_rig.empty()) {
        ImageHandle img;
        check(fk_render(cfg.c_str(), g.seed, img.put()));
        save_image(img.get(), g.out);
        std::cout << image_summary(img.get(), g.out);
      } else {
        if (right_out.empty()) throw InputError{"--right-out is required with --stereo-rig"};
        ImageHandle l;
        ImageHandle r;
        check(fk_render_stereo(cfg.c_str(), read_file(stereo_rig).c_str(), g.seed, l.put(), r.put()));
        save_image(l.get(), g.out);
        save_image(r.get(), right_out);
        std::cout << image_summary(l.get(), g.out) << image_summary(r.get(), right_out);
      }
    } else if (gen->parsed()) {
      FieldHandle field;
      load_field(field_path, field);
      const std::string cfg = config_text(g);
      OwnedString out;
      check(fk_generate_trajectory(field.get(), cfg.c_str(), g.seed, out.put()));
      emit(g, out.str());
    }
  } catch (const Failure& f) {
    std::cerr << "fieldkit: " << f.message << '\n';
    return fk_status_is_input_error(f.status) ? kExitInput : kExitAlgorithm;
  } catch (const InputError& e) {
    std::cerr << "fieldkit: " << e.message << '\n';
    return kExitInput;
  }
  return kExitOk;
}

#include "fieldkit/fieldkit.h"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <sstream>
#include <string>

#include "fieldkit/ball_planner.hpp"
#include "fieldkit/camera.hpp"
#include "fieldkit/error.hpp"
#include "fieldkit/field_model.hpp"
#include "fieldkit/image.hpp"
#include "fieldkit/line_vision.hpp"
#include "fieldkit/localization.hpp"
#include "fieldkit/pipeline.hpp"
#include "fieldkit/render.hpp"
#include "fieldkit/serialization.hpp"
#include "fieldkit/stereo.hpp"
#include "fieldkit/trajectory.hpp"

struct fk_image {
  fieldkit::Image image;
};

struct fk_field {
  fieldkit::FieldSpec spec;
};

struct fk_pipeline {
  fieldkit::pipeline::PipelineSpec spec;
};

namespace {

using fieldkit::Error;
using fieldkit::ErrorKind;
using fieldkit::io::json;

thread_local std::string g_last_error;

fk_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return FK_ERR_INVALID_ARGUMENT;
    case ErrorKind::Parse: return FK_ERR_PARSE;
    case ErrorKind::Io: return FK_ERR_IO;
    case ErrorKind::OutOfField: return FK_ERR_OUT_OF_FIELD;
    case ErrorKind::NoPath: return FK_ERR_NO_PATH;
    case ErrorKind::BehindCamera: return FK_ERR_BEHIND_CAMERA;
    case ErrorKind::HorizonRay: return FK_ERR_HORIZON_RAY;
    case ErrorKind::InvalidDistortion: return FK_ERR_INVALID_DISTORTION;
    case ErrorKind::Degenerate: return FK_ERR_DEGENERATE;
    case ErrorKind::DegenerateCloud: return FK_ERR_DEGENERATE_CLOUD;
    case ErrorKind::DimensionMismatch: return FK_ERR_DIMENSION_MISMATCH;
    case ErrorKind::Cycle: return FK_ERR_CYCLE;
    case ErrorKind::UnknownSlot: return FK_ERR_UNKNOWN_SLOT;
    case ErrorKind::DuplicateProducer: return FK_ERR_DUPLICATE_PRODUCER;
    case ErrorKind::FilterFailure: return FK_ERR_FILTER_FAILURE;
  }
  return FK_ERR_INTERNAL;
}

template <typename F>
fk_status guard(F&& f) {
  try {
    f();
    return FK_OK;
  } catch (const Error& e) {
    g_last_error = std::string(fieldkit::to_string(e.kind())) + ": " + e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return FK_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = std::string("internal error: ") + e.what();
    return FK_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "internal error";
    return FK_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw Error(ErrorKind::InvalidArgument, std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse_optional(const char* text) {
  if (text == nullptr || text[0] == '\0') return json::object();
  return fieldkit::io::parse(text);
}

fk_image* wrap(fieldkit::Image img) { return new fk_image{std::move(img)}; }

std::string dump(const json& j) { return j.dump(2); }

}  // namespace

extern "C" {

const char* fk_version(void) { return "0.1.0"; }

const char* fk_status_name(fk_status status) {
  switch (status) {
    case FK_OK: return "Ok";
    case FK_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case FK_ERR_PARSE: return "Parse";
    case FK_ERR_IO: return "Io";
    case FK_ERR_OUT_OF_FIELD: return "OutOfField";
    case FK_ERR_NO_PATH: return "NoPath";
    case FK_ERR_BEHIND_CAMERA: return "BehindCamera";
    case FK_ERR_HORIZON_RAY: return "HorizonRay";
    case FK_ERR_INVALID_DISTORTION: return "InvalidDistortion";
    case FK_ERR_DEGENERATE: return "Degenerate";
    case FK_ERR_DEGENERATE_CLOUD: return "DegenerateCloud";
    case FK_ERR_DIMENSION_MISMATCH: return "DimensionMismatch";
    case FK_ERR_CYCLE: return "Cycle";
    case FK_ERR_UNKNOWN_SLOT: return "UnknownSlot";
    case FK_ERR_DUPLICATE_PRODUCER: return "DuplicateProducer";
    case FK_ERR_FILTER_FAILURE: return "FilterFailure";
    case FK_ERR_INTERNAL: return "Internal";
  }
  return "Unknown";
}

int fk_status_is_input_error(fk_status status) {
  switch (status) {
    case FK_OK:
    case FK_ERR_NO_PATH:
    case FK_ERR_DEGENERATE:
    case FK_ERR_DEGENERATE_CLOUD:
    case FK_ERR_FILTER_FAILURE:
    case FK_ERR_INTERNAL:
      return 0;
    default:
      return 1;
  }
}

const char* fk_last_error(void) { return g_last_error.c_str(); }

void fk_string_free(char* s) { std::free(s); }

fk_status fk_image_create(int width, int height, int channels, fk_image** out) {
  return guard([&] {
    require(out, "out");
    if (width <= 0 || height <= 0) throw Error(ErrorKind::InvalidArgument, "image size must be positive");
    *out = wrap(fieldkit::Image(width, height, channels));
  });
}

fk_status fk_image_load(const char* path, fk_image** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = wrap(fieldkit::read_pnm(path));
  });
}

fk_status fk_image_save(const fk_image* image, const char* path) {
  return guard([&] {
    require(image, "image");
    require(path, "path");
    fieldkit::write_pnm(image->image, path);
  });
}

void fk_image_destroy(fk_image* image) { delete image; }
int fk_image_width(const fk_image* image) { return image ? image->image.width() : 0; }
int fk_image_height(const fk_image* image) { return image ? image->image.height() : 0; }
int fk_image_channels(const fk_image* image) { return image ? image->image.channels() : 0; }
uint8_t* fk_image_data(fk_image* image) { return image ? image->image.data().data() : nullptr; }
const uint8_t* fk_image_const_data(const fk_image* image) { return image ? image->image.data().data() : nullptr; }

fk_status fk_field_default(fk_field** out) {
  return guard([&] {
    require(out, "out");
    *out = new fk_field{fieldkit::FieldSpec::kidsize()};
  });
}

fk_status fk_field_from_json(const char* text, fk_field** out) {
  return guard([&] {
    require(text, "json");
    require(out, "out");
    *out = new fk_field{fieldkit::io::field_from_json(fieldkit::io::parse(text))};
  });
}

fk_status fk_field_to_json(const fk_field* field, char** out_json) {
  return guard([&] {
    require(field, "field");
    require(out_json, "out_json");
    *out_json = dup_string(dump(fieldkit::io::to_json(field->spec)));
  });
}

void fk_field_destroy(fk_field* field) { delete field; }

fk_status fk_field_pose_to_cell(const fk_field* field, double x, double y, int* row, int* col) {
  return guard([&] {
    require(field, "field");
    require(row, "row");
    require(col, "col");
    const auto cell = fieldkit::pose_to_cell(fieldkit::Vec2(x, y), field->spec);
    *row = cell.row;
    *col = cell.col;
  });
}

fk_status fk_field_cell_center(const fk_field* field, int row, int col, double* x, double* y) {
  return guard([&] {
    require(field, "field");
    require(x, "x");
    require(y, "y");
    const fieldkit::GridIndex cell{row, col};
    if (!fieldkit::is_valid(cell, field->spec)) throw Error(ErrorKind::InvalidArgument, "cell out of range");
    const auto c = fieldkit::cell_center(cell, field->spec);
    *x = c.x();
    *y = c.y();
  });
}

fk_status fk_plan(const fk_field* field, const char* request_json, int use_heuristic, char** out_json) {
  return guard([&] {
    require(field, "field");
    require(request_json, "request_json");
    require(out_json, "out_json");
    const auto ctx = fieldkit::io::plan_context_from_json(fieldkit::io::parse(request_json));
    fieldkit::PlanOptions options;
    options.use_heuristic = use_heuristic != 0;
    const auto plan = fieldkit::plan_ball_path(ctx, field->spec, options);
    *out_json = dup_string(dump(fieldkit::io::to_json(plan)));
  });
}

fk_status fk_plan_render(const fk_field* field, const char* request_json, int use_heuristic,
                         double meters_per_pixel, fk_image** out) {
  return guard([&] {
    require(field, "field");
    require(request_json, "request_json");
    require(out, "out");
    const auto ctx = fieldkit::io::plan_context_from_json(fieldkit::io::parse(request_json));
    fieldkit::PlanOptions options;
    options.use_heuristic = use_heuristic != 0;
    const auto plan = fieldkit::plan_ball_path(ctx, field->spec, options);
    *out = wrap(fieldkit::draw_plan(field->spec, ctx, plan, meters_per_pixel));
  });
}

fk_status fk_detect_lines(const fk_image* image, const char* config_json, uint64_t seed, char** out_json) {
  return guard([&] {
    require(image, "image");
    require(out_json, "out_json");
    auto config = fieldkit::io::detector_config_from_json(parse_optional(config_json));
    config.hough.seed = seed;
    const auto detections = fieldkit::lines::detect_lines(image->image, config);
    *out_json = dup_string(dump(fieldkit::io::to_json(detections)));
  });
}

fk_status fk_birdview(const fk_image* image, const char* camera_json, fk_image** out) {
  return guard([&] {
    require(image, "image");
    require(camera_json, "camera_json");
    require(out, "out");
    const json j = fieldkit::io::parse(camera_json);
    if (!j.is_object()) throw Error(ErrorKind::Parse, "camera document must be an object");
    const auto in = j.contains("intrinsics") ? fieldkit::io::intrinsics_from_json(j.at("intrinsics"))
                                             : fieldkit::CameraIntrinsics{};
    const auto ex =
        j.contains("camera") ? fieldkit::io::extrinsics_from_json(j.at("camera")) : fieldkit::CameraExtrinsics{};
    const auto view =
        j.contains("birdview") ? fieldkit::io::birdview_from_json(j.at("birdview")) : fieldkit::BirdviewSpec{};
    auto sampling = fieldkit::Sampling::Nearest;
    if (j.contains("sampling")) {
      const auto s = j.at("sampling").get<std::string>();
      if (s == "bilinear") {
        sampling = fieldkit::Sampling::Bilinear;
      } else if (s != "nearest") {
        throw Error(ErrorKind::InvalidArgument, "sampling must be 'nearest' or 'bilinear'");
      }
    }
    if (image->image.width() != in.width || image->image.height() != in.height) {
      throw Error(ErrorKind::DimensionMismatch, "image size differs from the intrinsics");
    }
    *out = wrap(fieldkit::birdview_transform(image->image, ex, in, view, sampling));
  });
}

fk_status fk_distort(const fk_image* image, const char* intrinsics_json, double k1, double k2, fk_image** out) {
  return guard([&] {
    require(image, "image");
    require(out, "out");
    auto in = fieldkit::io::intrinsics_from_json(parse_optional(intrinsics_json));
    if (image->image.width() != in.width || image->image.height() != in.height) {
      throw Error(ErrorKind::DimensionMismatch, "image size differs from the intrinsics");
    }
    *out = wrap(fieldkit::emulate_wide_angle(image->image, in, k1, k2));
  });
}

fk_status fk_fov_mask(const char* intrinsics_json, double fov_limit, fk_image** out) {
  return guard([&] {
    require(out, "out");
    const auto in = fieldkit::io::intrinsics_from_json(parse_optional(intrinsics_json));
    *out = wrap(fieldkit::fov_mask(in, fov_limit));
  });
}

fk_status fk_apply_mask(fk_image* image, const fk_image* mask) {
  return guard([&] {
    require(image, "image");
    require(mask, "mask");
    fieldkit::apply_mask(image->image, mask->image);
  });
}

fk_status fk_localize(const fk_field* field, const char* trajectory_json, const char* config_json, uint64_t seed,
                      char** out_json_lines) {
  return guard([&] {
    require(field, "field");
    require(trajectory_json, "trajectory_json");
    require(out_json_lines, "out_json_lines");
    const json doc = fieldkit::io::parse(trajectory_json);
    const auto steps = fieldkit::io::trajectory_from_json(doc);
    const json cfg = parse_optional(config_json);
    const auto config = fieldkit::io::filter_config_from_json(cfg);
    fieldkit::ParticleFilter filter(field->spec, config, seed);
    if (cfg.contains("init_region")) {
      const json& r = cfg.at("init_region");
      fieldkit::Region region;
      region.x_min = r.value("x_min", region.x_min);
      region.x_max = r.value("x_max", region.x_max);
      region.y_min = r.value("y_min", region.y_min);
      region.y_max = r.value("y_max", region.y_max);
      filter.reset(region);
    }
    std::ostringstream out;
    for (std::size_t k = 0; k < steps.size(); ++k) {
      filter.step(steps[k].odometry, steps[k].observations);
      const auto est = filter.estimate();
      json line = fieldkit::io::to_json(est);
      line["step"] = k;
      if (doc.at("steps")[k].contains("truth")) {
        const auto& t = steps[k].truth;
        line["error_xy"] = std::hypot(est.pose.x - t.x, est.pose.y - t.y);
        line["error_theta"] = std::fabs(fieldkit::normalize_angle(est.pose.theta - t.theta));
      }
      out << line.dump() << '\n';
    }
    *out_json_lines = dup_string(out.str());
  });
}

fk_status fk_generate_trajectory(const fk_field* field, const char* config_json, uint64_t seed, char** out_json) {
  return guard([&] {
    require(field, "field");
    require(out_json, "out_json");
    auto config = fieldkit::io::trajectory_config_from_json(parse_optional(config_json));
    config.seed = seed;
    *out_json = dup_string(dump(fieldkit::io::trajectory_to_json(fieldkit::generate_trajectory(field->spec, config))));
  });
}

fk_status fk_stereo(const fk_image* left, const fk_image* right, const char* rig_json, const char* params_json,
                    uint64_t seed, char** out_json, char** out_xyz) {
  return guard([&] {
    require(left, "left");
    require(right, "right");
    require(out_json, "out_json");
    const auto rig = fieldkit::io::rig_from_json(parse_optional(rig_json));
    auto params = fieldkit::io::obstacle_params_from_json(parse_optional(params_json));
    params.seed = seed;
    const auto result = fieldkit::stereo::detect_obstacles(left->image, right->image, rig, params);
    std::string xyz;
    if (out_xyz != nullptr) {
      std::ostringstream s;
      s.precision(9);
      for (const auto& p : result.cloud) s << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
      xyz = s.str();
    }
    *out_json = dup_string(dump(fieldkit::io::to_json(result)));
    if (out_xyz != nullptr) *out_xyz = dup_string(xyz);
  });
}

fk_status fk_render(const char* scene_json, uint64_t seed, fk_image** out) {
  return guard([&] {
    require(out, "out");
    auto scene = fieldkit::io::scene_from_json(parse_optional(scene_json));
    scene.seed = seed;
    *out = wrap(fieldkit::render_field(scene));
  });
}

fk_status fk_render_stereo(const char* scene_json, const char* rig_json, uint64_t seed, fk_image** left,
                           fk_image** right) {
  return guard([&] {
    require(left, "left");
    require(right, "right");
    auto scene = fieldkit::io::scene_from_json(parse_optional(scene_json));
    scene.seed = seed;
    const auto rig = fieldkit::io::rig_from_json(parse_optional(rig_json));
    auto [l, r] = fieldkit::render_stereo(scene, rig);
    *left = wrap(std::move(l));
    *right = wrap(std::move(r));
  });
}

fk_status fk_pipeline_parse(const char* text, fk_pipeline** out) {
  return guard([&] {
    require(text, "json");
    require(out, "out");
    *out = new fk_pipeline{fieldkit::pipeline::parse_pipeline(text)};
  });
}

void fk_pipeline_destroy(fk_pipeline* pipeline) { delete pipeline; }

fk_status fk_pipeline_batches(const fk_pipeline* pipeline, char** out_json) {
  return guard([&] {
    require(pipeline, "pipeline");
    require(out_json, "out_json");
    *out_json = dup_string(dump(json{{"batches", fieldkit::pipeline::compute_batches(pipeline->spec).batches}}));
  });
}

fk_status fk_pipeline_run(const fk_pipeline* pipeline, uint64_t frames, int workers, fk_filter_fn fn, void* user,
                          char** out_json) {
  return guard([&] {
    require(pipeline, "pipeline");
    require(out_json, "out_json");
    if (fn == nullptr) throw Error(ErrorKind::InvalidArgument, "fn must not be NULL");
    std::map<std::string, fieldkit::pipeline::Filter> registry;
    for (const auto& f : pipeline->spec.filters) {
      registry[f.name] = [fn, user](fieldkit::pipeline::FilterIO& io) {
        if (fn(io.name().c_str(), io.frame(), user) != 0) {
          throw std::runtime_error("callback returned failure");
        }
        for (const auto& slot : io.spec().outputs) io.output(slot, io.frame());
      };
    }
    fieldkit::pipeline::Runner runner(pipeline->spec, std::move(registry), workers);
    for (std::uint64_t f = 0; f < frames; ++f) runner.run_frame(f);
    std::map<std::string, std::uint64_t> counts;
    for (const auto& f : pipeline->spec.filters) counts[f.name] = 0;
    for (const auto& rec : runner.trace()) ++counts[rec.filter];
    *out_json = dup_string(dump(json{{"frames", frames}, {"executions", counts}}));
  });
}

fk_status fk_pipeline_bench(const fk_pipeline* pipeline, uint64_t frames, int workers, int include_timing,
                            char** out_json) {
  return guard([&] {
    require(pipeline, "pipeline");
    require(out_json, "out_json");
    const auto r = fieldkit::pipeline::run_bench(pipeline->spec, frames, workers);
    json j{{"batches", r.plan.batches}, {"frames", r.frames}, {"executions", r.executions}};
    if (include_timing != 0) {
      j["timing"] = {{"workers", r.workers},
                     {"parallel_ms_per_frame", r.parallel_ms_per_frame},
                     {"serial_ms_per_frame", r.serial_ms_per_frame},
                     {"speedup", r.speedup()}};
    }
    *out_json = dup_string(dump(j));
  });
}

}  // extern "C"

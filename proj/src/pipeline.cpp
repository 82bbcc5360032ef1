#include "ocdc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "ocdc/annotations.hpp"
#include "ocdc/domain_labels.hpp"
#include "ocdc/image_io.hpp"
#include "ocdc/rng.hpp"

namespace ocdc {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormat = "ocdc-run/1";
constexpr std::uint64_t kPairingSalt = 0x50414952ULL;

json box_json(const BBox& b) {
  return {{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}, {"class_id", b.class_id}};
}

BBox box_from_json(const json& j) {
  return {j.at("x").get<int>(), j.at("y").get<int>(), j.at("w").get<int>(), j.at("h").get<int>(),
          j.at("class_id").get<int>()};
}

// Largest overlap of `rect` with the boxes protected when it was accepted.
double max_protected_overlap(const BBox& rect, std::span<const BBox> originals,
                             std::span<const PasteRecord> earlier) {
  double worst = 0.0;
  for (const auto& p : originals) worst = std::max(worst, overlap_ratio(rect, p));
  for (const auto& r : earlier) worst = std::max(worst, overlap_ratio(rect, r.dst_rect));
  return worst;
}

json records_json(const std::vector<PasteRecord>& records, std::span<const BBox> originals) {
  json out = json::array();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    out.push_back({{"direction", to_string(r.direction)},
                   {"src_image_id", r.src_image_id},
                   {"src_box", box_json(r.src_box)},
                   {"dst_rect", box_json(r.dst_rect)},
                   {"scale_factor", r.scale_factor},
                   {"max_overlap",
                    max_protected_overlap(r.dst_rect, originals,
                                          std::span(records).first(i))}});
  }
  return out;
}

struct ParsedRecord {
  PasteRecord record;
  double max_overlap = 0.0;
};

std::vector<ParsedRecord> records_from_json(const json& arr) {
  std::vector<ParsedRecord> out;
  for (const auto& j : arr) {
    ParsedRecord p;
    p.record.direction = parse_direction(j.at("direction").get<std::string>());
    p.record.src_image_id = j.at("src_image_id").get<std::string>();
    p.record.src_box = box_from_json(j.at("src_box"));
    p.record.dst_rect = box_from_json(j.at("dst_rect"));
    p.record.scale_factor = j.at("scale_factor").get<double>();
    p.max_overlap = j.at("max_overlap").get<double>();
    out.push_back(std::move(p));
  }
  return out;
}

PasteStrategy strategy_from_echo(const json& c) {
  PasteStrategy s;
  s.position = parse_position_mode(c.at("position").get<std::string>());
  s.scaling = parse_scaling_mode(c.at("scaling").get<std::string>());
  s.scale_min = c.at("scale_min").get<double>();
  s.scale_max = c.at("scale_max").get<double>();
  s.gamma = c.at("gamma").get<double>();
  s.max_attempts = c.at("max_attempts").get<int>();
  s.min_box_side = c.at("min_box_side").get<int>();
  s.jitter_radius = c.at("jitter_radius").get<int>();
  return s;
}

void prepare_out_dir(const fs::path& out_dir) {
  if (!fs::exists(out_dir)) {
    fs::create_directories(out_dir);
    return;
  }
  if (!fs::is_directory(out_dir)) {
    throw ConfigError("out_dir exists and is not a directory: " + out_dir.string());
  }
  // Only artifacts of an earlier run are replaced; anything else is refused.
  std::vector<fs::path> stale;
  for (const auto& entry : fs::directory_iterator(out_dir)) {
    const std::string name = entry.path().filename().string();
    const bool ours = name == run_layout::kManifest ||
                      (entry.is_directory() && name.rfind("iter_", 0) == 0);
    if (!ours) {
      throw ConfigError("out_dir is not empty and is not a previous run: " + out_dir.string());
    }
    stale.push_back(entry.path());
  }
  for (const auto& p : stale) fs::remove_all(p);
}

struct IterationJob {
  const PipelineConfig* config;
  const Dataset* source;
  const Dataset* target;
  BatchPair pair;
};

void write_iteration(const IterationJob& job) {
  const PipelineConfig& cfg = *job.config;
  BatchSample sample = make_sample(*job.source, *job.target, job.pair);
  if (cfg.resize) {
    sample.source_item = resize_to_training(sample.source_item);
    sample.target_item = resize_to_training(sample.target_item);
  }
  const AugmentedPair out = augment_pair(sample, cfg.strategy, cfg.seed);

  const DomainLabelMap source_map = switch_labels(
      base_label_map(Domain::Source, out.source.pixels.size(), cfg.stride), out.into_source);
  const DomainLabelMap target_map = switch_labels(
      base_label_map(Domain::Target, out.target.pixels.size(), cfg.stride), out.into_target);

  AnnotationDocument ann;
  ann.classes = job.source->class_names;
  ann.images.push_back({out.source.image_id, run_layout::kSourceImage, {}, out.source.pixels.size(),
                        out.source.boxes, Domain::Source});
  ann.images.push_back({out.target.image_id, run_layout::kTargetImage, {}, out.target.pixels.size(),
                        out.target.boxes, Domain::Target});

  const json pastes = {
      {"iteration", job.pair.iteration_index},
      {"source_id", sample.source_item.image_id},
      {"target_id", sample.target_item.image_id},
      {"into_source", records_json(out.into_source, sample.source_item.boxes)},
      {"into_target", records_json(out.into_target, sample.target_item.boxes)},
  };

  const fs::path dir = cfg.out_dir / run_layout::iteration_dir(job.pair.iteration_index);
  fs::create_directories(dir);
  write_file_atomic(dir / run_layout::kSourceImage, encode_png(out.source.pixels));
  write_file_atomic(dir / run_layout::kTargetImage, encode_png(out.target.pixels));
  write_file_atomic(dir / run_layout::kAnnotations, to_json(ann).dump(2) + "\n");
  write_file_atomic(dir / run_layout::kSourceLabels, encode_pgm(source_map.to_image()));
  write_file_atomic(dir / run_layout::kTargetLabels, encode_pgm(target_map.to_image()));
  write_file_atomic(dir / run_layout::kPastes, pastes.dump(2) + "\n");
}

const char* const kIterationFiles[] = {
    run_layout::kSourceImage,  run_layout::kTargetImage,  run_layout::kAnnotations,
    run_layout::kSourceLabels, run_layout::kTargetLabels, run_layout::kPastes,
};

}  // namespace

std::string run_layout::iteration_dir(std::size_t iteration) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "iter_%06zu", iteration);
  return buf;
}

void PipelineConfig::validate() const {
  try {
    strategy.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (stride < 1) throw ConfigError("stride must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (target_fraction.num <= 0 || target_fraction.den <= 0 ||
      target_fraction.num > target_fraction.den) {
    throw ConfigError("target_fraction must lie in (0, 1]");
  }
  auto need_dir = [](const fs::path& p, const char* what) {
    if (p.empty() || !fs::is_directory(p)) {
      throw ConfigError(std::string(what) + " is not a directory: " + p.string());
    }
  };
  auto need_file = [](const fs::path& p, const char* what) {
    if (p.empty() || !fs::is_regular_file(p)) {
      throw ConfigError(std::string(what) + " is not a file: " + p.string());
    }
  };
  need_dir(source_images, "source_images");
  need_dir(target_images, "target_images");
  need_file(source_ann, "source_ann");
  need_file(target_ann, "target_ann");
  if (out_dir.empty()) throw ConfigError("out_dir is required");
}

json PipelineConfig::echo() const {
  return {{"source_images", source_images.generic_string()},
          {"source_ann", source_ann.generic_string()},
          {"target_images", target_images.generic_string()},
          {"target_ann", target_ann.generic_string()},
          {"position", to_string(strategy.position)},
          {"scaling", to_string(strategy.scaling)},
          {"scale_min", strategy.scale_min},
          {"scale_max", strategy.scale_max},
          {"gamma", strategy.gamma},
          {"max_attempts", strategy.max_attempts},
          {"min_box_side", strategy.min_box_side},
          {"jitter_radius", strategy.jitter_radius},
          {"stride", stride},
          {"target_fraction", to_string(target_fraction)},
          {"epoch_length", epoch_length},
          {"seed", seed},
          {"resize", resize}};
}

RunManifest run_augment(const PipelineConfig& config) {
  config.validate();
  Dataset source = load_annotations(config.source_images, config.source_ann, Domain::Source);
  Dataset target = load_annotations(config.target_images, config.target_ann, Domain::Target);
  unify_classes(source, target);
  target = subsample(target, config.target_fraction, config.seed);

  std::vector<BatchPair> pairs;
  if (config.epoch_length > 0) {
    pairs = pair_batches(source, target, config.epoch_length, hash64(config.seed, {kPairingSalt}));
  }
  prepare_out_dir(config.out_dir);

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pairs.size()) return;
      {
        std::lock_guard lock(error_mutex);
        if (first_error) return;
      }
      try {
        write_iteration({&config, &source, &target, pairs[i]});
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const std::size_t thread_count =
      std::min<std::size_t>(static_cast<std::size_t>(config.workers), std::max<std::size_t>(1, pairs.size()));
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < thread_count; ++t) pool.emplace_back(worker);
  pool.clear();
  if (first_error) std::rethrow_exception(first_error);

  json files = json::object();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::string dir = run_layout::iteration_dir(i);
    for (const char* name : kIterationFiles) {
      const std::string rel = dir + "/" + name;
      files[rel] = sha256_hex(read_file(config.out_dir / rel));
    }
  }

  RunManifest manifest;
  manifest.iterations = pairs.size();
  manifest.files = files.size();
  manifest.json = {{"format", kFormat},
                   {"config", config.echo()},
                   {"classes", source.class_names},
                   {"source_items", source.size()},
                   {"target_items", target.size()},
                   {"iterations", pairs.size()},
                   {"files", std::move(files)}};
  write_file_atomic(config.out_dir / run_layout::kManifest, manifest.json.dump(2) + "\n");
  return manifest;
}

// ---------------------------------------------------------------------------
// verification
// ---------------------------------------------------------------------------

json VerifyReport::to_json() const {
  json diags = json::array();
  for (const auto& d : diagnostics) {
    diags.push_back({{"file", d.file}, {"check", d.check}, {"message", d.message}});
  }
  return {{"ok", ok},
          {"iterations_checked", iterations_checked},
          {"files_hashed", files_hashed},
          {"diagnostics", std::move(diags)}};
}

namespace {

class Verifier {
 public:
  explicit Verifier(fs::path run_dir) : run_dir_(std::move(run_dir)) {}

  VerifyReport run() {
    json manifest;
    try {
      manifest = json::parse(read_text(run_layout::kManifest));
    } catch (const std::exception& e) {
      fail(run_layout::kManifest, "manifest", e.what());
      return report_;
    }
    try {
      if (manifest.at("format") != kFormat) {
        fail(run_layout::kManifest, "manifest", "unknown format");
        return report_;
      }
      const json& cfg = manifest.at("config");
      strategy_ = strategy_from_echo(cfg);
      stride_ = cfg.at("stride").get<int>();
      iterations_ = manifest.at("iterations").get<std::size_t>();
      check_hashes(manifest.at("files"));
    } catch (const std::exception& e) {
      fail(run_layout::kManifest, "manifest", std::string("malformed manifest: ") + e.what());
      return report_;
    }
    for (std::size_t i = 0; i < iterations_; ++i) {
      check_iteration(i);
      ++report_.iterations_checked;
    }
    return report_;
  }

 private:
  struct Side {
    std::string name;
    Domain domain;
    const char* image_file;
    const char* labels_file;
    const char* records_key;
  };

  std::string read_text(const std::string& rel) const {
    const auto bytes = read_file(run_dir_ / rel);
    return {bytes.begin(), bytes.end()};
  }

  void fail(std::string file, std::string check, std::string message) {
    report_.ok = false;
    report_.diagnostics.push_back({std::move(file), std::move(check), std::move(message)});
  }

  void check_hashes(const json& files) {
    std::size_t expected_files = iterations_ * std::size(kIterationFiles);
    if (files.size() != expected_files) {
      fail(run_layout::kManifest, "hash", "manifest lists " + std::to_string(files.size()) +
                                              " files, expected " + std::to_string(expected_files));
    }
    for (const auto& [rel, digest] : files.items()) {
      ++report_.files_hashed;
      std::string actual;
      try {
        actual = sha256_hex(read_file(run_dir_ / rel));
      } catch (const std::exception& e) {
        fail(rel, "hash", e.what());
        continue;
      }
      if (actual != digest.get<std::string>()) {
        fail(rel, "hash", "content hash mismatch (expected " + digest.get<std::string>() +
                              ", found " + actual + ")");
      }
    }
  }

  void check_iteration(std::size_t i) {
    const std::string dir = run_layout::iteration_dir(i) + "/";
    AnnotationDocument ann;
    json pastes;
    try {
      ann = parse_annotation_document(json::parse(read_text(dir + run_layout::kAnnotations)));
    } catch (const std::exception& e) {
      fail(dir + run_layout::kAnnotations, "annotations", e.what());
      return;
    }
    try {
      pastes = json::parse(read_text(dir + run_layout::kPastes));
    } catch (const std::exception& e) {
      fail(dir + run_layout::kPastes, "records", e.what());
      return;
    }
    if (ann.images.size() != 2 || ann.images[0].domain != Domain::Source ||
        ann.images[1].domain != Domain::Target) {
      fail(dir + run_layout::kAnnotations, "annotations", "expected one source and one target image");
      return;
    }

    std::vector<ParsedRecord> into_source, into_target;
    try {
      into_source = records_from_json(pastes.at("into_source"));
      into_target = records_from_json(pastes.at("into_target"));
    } catch (const std::exception& e) {
      fail(dir + run_layout::kPastes, "records", std::string("malformed record: ") + e.what());
      return;
    }
    const ImageRecord& src = ann.images[0];
    const ImageRecord& tgt = ann.images[1];
    const std::size_t src_original = src.boxes.size() - std::min(src.boxes.size(), into_source.size());
    const std::size_t tgt_original = tgt.boxes.size() - std::min(tgt.boxes.size(), into_target.size());
    const std::span<const BBox> src_orig_boxes(src.boxes.data(), src_original);
    const std::span<const BBox> tgt_orig_boxes(tgt.boxes.data(), tgt_original);

    check_side(dir, {"source", Domain::Source, run_layout::kSourceImage, run_layout::kSourceLabels,
                     "into_source"},
               src, into_source, tgt_orig_boxes, PasteDirection::TargetIntoSource);
    check_side(dir, {"target", Domain::Target, run_layout::kTargetImage, run_layout::kTargetLabels,
                     "into_target"},
               tgt, into_target, src_orig_boxes, PasteDirection::SourceIntoTarget);
  }

  void check_side(const std::string& dir, const Side& side, const ImageRecord& dst,
                  const std::vector<ParsedRecord>& records, std::span<const BBox> counterpart_boxes,
                  PasteDirection expected_direction) {
    const std::string ann_file = dir + run_layout::kAnnotations;
    const std::string rec_file = dir + run_layout::kPastes;

    // Image dimensions against annotations.
    try {
      const Image img = decode_png(read_file(run_dir_ / (dir + side.image_file)));
      if (img.size() != dst.size) {
        fail(dir + side.image_file, "bounds", "image size does not match annotations");
      }
    } catch (const std::exception& e) {
      fail(dir + side.image_file, "image", e.what());
    }

    if (records.size() > dst.boxes.size()) {
      fail(rec_file, "records", side.name + ": more paste records than boxes in annotations");
      return;
    }
    const std::size_t original = dst.boxes.size() - records.size();
    const std::span<const BBox> originals(dst.boxes.data(), original);

    std::vector<PasteRecord> accepted;
    for (std::size_t j = 0; j < records.size(); ++j) {
      const PasteRecord& r = records[j].record;
      const std::string where = std::string(side.records_key) + "[" + std::to_string(j) + "]";
      if (r.direction != expected_direction) {
        fail(rec_file, "records", where + ": wrong direction");
      }
      BBox merged = r.dst_rect;
      merged.class_id = r.src_box.class_id;
      if (!(dst.boxes[original + j] == merged)) {
        fail(ann_file, "annotations", where + ": merged box does not match the record's dst_rect");
      }
      if (!fits_inside(r.dst_rect, dst.size)) {
        fail(rec_file, "bounds", where + ": dst_rect outside destination image");
      }
      if (std::find(counterpart_boxes.begin(), counterpart_boxes.end(), r.src_box) ==
          counterpart_boxes.end()) {
        fail(rec_file, "records", where + ": src_box is not a ground-truth box of the counterpart image");
      }
      if (r.src_box.w <= strategy_.min_box_side || r.src_box.h <= strategy_.min_box_side) {
        fail(rec_file, "size", where + ": source box below the minimum side");
      }
      const bool fixed_scale = strategy_.scaling == ScalingMode::Fixed;
      if (fixed_scale ? r.scale_factor != 1.0
                      : !(r.scale_factor >= strategy_.scale_min && r.scale_factor <= strategy_.scale_max)) {
        fail(rec_file, "scale", where + ": scale factor out of range");
      }
      if (r.dst_rect.w != scaled_side(r.src_box.w, r.scale_factor) ||
          r.dst_rect.h != scaled_side(r.src_box.h, r.scale_factor)) {
        fail(rec_file, "scale", where + ": dst_rect size is not the scaled source size");
      }
      const double overlap = max_protected_overlap(r.dst_rect, originals, accepted);
      if (overlap > strategy_.gamma) {
        std::ostringstream msg;
        msg << where << ": overlap ratio " << overlap << " exceeds gamma " << strategy_.gamma;
        fail(rec_file, "overlap", msg.str());
      }
      if (std::abs(overlap - records[j].max_overlap) > 1e-12) {
        std::ostringstream msg;
        msg << where << ": recorded max_overlap " << records[j].max_overlap
            << " differs from recomputed " << overlap;
        fail(rec_file, "overlap", msg.str());
      }
      accepted.push_back(r);
    }

    check_labels(dir + side.labels_file, side.domain, dst.size, accepted);
  }

  // Independent of switch_labels: a cell takes the pasted domain iff its
  // full stride tile has positive-area intersection with some dst_rect.
  void check_labels(const std::string& file, Domain base, ImageSize size,
                    const std::vector<PasteRecord>& records) {
    Image raster;
    try {
      raster = decode_pgm(read_file(run_dir_ / file));
    } catch (const std::exception& e) {
      fail(file, "labels", e.what());
      return;
    }
    const int rows = feature_extent(size.height, stride_);
    const int cols = feature_extent(size.width, stride_);
    if (raster.width() != cols || raster.height() != rows) {
      fail(file, "labels", "label map is " + std::to_string(raster.width()) + "x" +
                               std::to_string(raster.height()) + ", expected " +
                               std::to_string(cols) + "x" + std::to_string(rows));
      return;
    }
    std::size_t reported = 0;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const BBox tile{c * stride_, r * stride_, stride_, stride_, 0};
        Domain expected = base;
        for (const auto& rec : records) {
          if (intersect_area(tile, rec.dst_rect) > 0) expected = origin_domain(rec.direction);
        }
        const std::uint8_t want = expected == Domain::Target ? 255 : 0;
        const std::uint8_t got = raster.at(c, r, 0);
        if (got != want && reported++ < 16) {
          fail(file, "labels", "cell (row " + std::to_string(r) + ", col " + std::to_string(c) +
                                   ") is " + std::to_string(got) + ", expected " +
                                   std::to_string(want));
        }
      }
    }
  }

  fs::path run_dir_;
  VerifyReport report_;
  PasteStrategy strategy_;
  int stride_ = 16;
  std::size_t iterations_ = 0;
};

}  // namespace

VerifyReport run_verify(const fs::path& run_dir) { return Verifier(run_dir).run(); }

}  // namespace ocdc

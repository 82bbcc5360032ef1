// Acceptance suite: one line per criterion, nonzero exit if any fails.
//
// Every oracle below is written against plain pixel/cell enumeration or
// term-by-term arithmetic, not against the library routine it checks.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ocdc/domain_labels.hpp"
#include "ocdc/geometry.hpp"
#include "ocdc/image_io.hpp"
#include "ocdc/ingest.hpp"
#include "ocdc/losses.hpp"
#include "ocdc/paste.hpp"
#include "ocdc/pipeline.hpp"
#include "ocdc/rng.hpp"
#include "support/run_helpers.hpp"
#include "support/synthetic.hpp"

namespace {

using namespace ocdc;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double time_limit_s;  // <= 0: no limit
  std::function<Outcome()> run;
};

// ---------------------------------------------------------------------------
// oracles
// ---------------------------------------------------------------------------

// Pixels of `existing` that also belong to `pasted`, by membership test.
std::int64_t pixel_count_covered(const BBox& pasted, const BBox& existing) {
  std::int64_t n = 0;
  for (int y = existing.y; y < existing.y + existing.h; ++y) {
    for (int x = existing.x; x < existing.x + existing.w; ++x) {
      if (x >= pasted.x && x < pasted.x + pasted.w && y >= pasted.y && y < pasted.y + pasted.h) ++n;
    }
  }
  return n;
}

// Overlap ratio from interval arithmetic, written independently of geometry.cpp.
double interval_overlap(const BBox& pasted, const BBox& existing) {
  const long long ix = std::max(0, std::min(pasted.x + pasted.w, existing.x + existing.w) - std::max(pasted.x, existing.x));
  const long long iy = std::max(0, std::min(pasted.y + pasted.h, existing.y + existing.h) - std::max(pasted.y, existing.y));
  return static_cast<double>(ix * iy) / (static_cast<double>(existing.w) * existing.h);
}

bool tile_touched(int r, int c, int stride, const BBox& b) {
  for (int y = r * stride; y < (r + 1) * stride; ++y) {
    if (y < b.y || y >= b.y + b.h) continue;
    for (int x = c * stride; x < (c + 1) * stride; ++x) {
      if (x >= b.x && x < b.x + b.w) return true;
    }
  }
  return false;
}

BBox random_box(Rng& rng, int canvas, int max_side) {
  const int w = static_cast<int>(rng.uniform_int(1, max_side));
  const int h = static_cast<int>(rng.uniform_int(1, max_side));
  return {static_cast<int>(rng.uniform_int(0, canvas - w)), static_cast<int>(rng.uniform_int(0, canvas - h)), w, h, 0};
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

Outcome geometry_oracle() {
  Rng rng(20240101);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const BBox a = random_box(rng, 256, 256);
    const BBox b = random_box(rng, 256, 256);
    const std::int64_t covered = pixel_count_covered(a, b);
    const std::int64_t area = std::int64_t{b.w} * b.h;
    const OverlapFraction f = overlap_fraction(a, b);
    const bool rational_equal = f.intersection * area == covered * f.existing_area;
    const bool ratio_equal = overlap_ratio(a, b) == static_cast<double>(covered) / static_cast<double>(area);
    if (!rational_equal || !ratio_equal) ++mismatches;
  }
  return {mismatches == 0, "1000 pairs on 256x256, mismatches=" + std::to_string(mismatches)};
}

Outcome algorithm_conformance() {
  Rng gen(777);
  const double gammas[] = {0.1, 0.25, 0.5, 0.75};
  long overlap_violations = 0, size_violations = 0, scale_violations = 0, bounds_violations = 0;
  long records = 0, random_scale_records = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    PasteStrategy s;
    s.gamma = gammas[gen.uniform_int(0, 3)];
    s.position = gen.uniform_int(0, 1) ? PositionMode::Random : PositionMode::Fixed;
    s.scaling = gen.uniform_int(0, 1) ? ScalingMode::Random : ScalingMode::Fixed;
    const ImageSize size{static_cast<int>(gen.uniform_int(100, 1000)), static_cast<int>(gen.uniform_int(100, 600))};
    const int crowd = static_cast<int>(gen.uniform_int(0, 30));
    std::vector<BBox> dst, src;
    for (int i = 0; i < crowd; ++i) dst.push_back(testing::random_box(gen, size, 2, 200));
    for (int i = static_cast<int>(gen.uniform_int(0, 12)); i > 0; --i) {
      src.push_back(testing::random_box(gen, {1000, 600}, 2, 250));
    }
    Rng rng(gen.next_u64());
    const PastePlan plan = plan_pastes(src, dst, size, s, rng);
    std::vector<BBox> protected_boxes = dst;
    for (const auto& r : plan.records) {
      ++records;
      for (const auto& p : protected_boxes) {
        if (interval_overlap(r.dst_rect, p) > s.gamma) ++overlap_violations;
      }
      protected_boxes.push_back(r.dst_rect);
      if (r.src_box.w <= 16 || r.src_box.h <= 16) ++size_violations;
      if (!(r.scale_factor >= 0.7 && r.scale_factor <= 1.3)) ++scale_violations;
      if (s.scaling == ScalingMode::Fixed && r.scale_factor != 1.0) ++scale_violations;
      if (s.scaling == ScalingMode::Random) ++random_scale_records;
      if (r.dst_rect.x < 0 || r.dst_rect.y < 0 || r.dst_rect.x + r.dst_rect.w > size.width ||
          r.dst_rect.y + r.dst_rect.h > size.height) {
        ++bounds_violations;
      }
    }
  }
  const bool ok = overlap_violations == 0 && size_violations == 0 && scale_violations == 0 &&
                  bounds_violations == 0 && records > 0 && random_scale_records > 0;
  return {ok, "10000 trials, records=" + std::to_string(records) +
                  " overlap_viol=" + std::to_string(overlap_violations) +
                  " size_viol=" + std::to_string(size_violations) +
                  " scale_viol=" + std::to_string(scale_violations) +
                  " bounds_viol=" + std::to_string(bounds_violations)};
}

Outcome ocdcdl_oracle() {
  Rng rng(4242);
  const int strides[] = {1, 8, 16, 32};
  int mismatched_cases = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int stride = strides[trial % 4];
    const int max_extent = stride == 1 ? 96 : 640;
    const ImageSize size{static_cast<int>(rng.uniform_int(1, max_extent)), static_cast<int>(rng.uniform_int(1, max_extent))};
    const bool into_source = rng.uniform_int(0, 1) == 1;
    const Domain base = into_source ? Domain::Source : Domain::Target;
    const auto dir = into_source ? PasteDirection::TargetIntoSource : PasteDirection::SourceIntoTarget;
    std::vector<PasteRecord> recs;
    for (int i = static_cast<int>(rng.uniform_int(0, 6)); i > 0; --i) {
      const BBox b = testing::random_box(rng, size, 1, std::max(1, max_extent / 3));
      recs.push_back({"x", b, b, 1.0, dir});
    }
    const DomainLabelMap map = switch_labels(base_label_map(base, size, stride), recs);
    const int rows = (size.height + stride - 1) / stride;
    const int cols = (size.width + stride - 1) / stride;
    bool ok = map.rows() == rows && map.cols() == cols;
    for (int r = 0; ok && r < rows; ++r) {
      for (int c = 0; ok && c < cols; ++c) {
        bool touched = false;
        for (const auto& rec : recs) touched = touched || tile_touched(r, c, stride, rec.dst_rect);
        const int expected = touched ? (into_source ? 1 : 0) : (into_source ? 0 : 1);
        ok = map.at(r, c) == expected;
      }
    }
    if (!ok) ++mismatched_cases;
  }
  return {mismatched_cases == 0, "500 cases, strides {1,8,16,32}, mismatched=" + std::to_string(mismatched_cases)};
}

PredictedDomainMap prediction(int rows, int cols, std::vector<double> values) {
  return {rows, cols, std::move(values), {cols * 16, rows * 16}, 16};
}

Outcome loss_correctness() {
  // 1x1 symmetric point.
  DomainLabelMap one({16, 16}, 16, Domain::Source);
  const double sym = adversarial_loss(prediction(1, 1, {0.5}), one).loss;
  const double sym_err = std::abs(sym - std::log(2.0));

  // Scalar-sum oracle on 100 random maps.
  Rng rng(31337);
  double worst_sum_err = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int rows = static_cast<int>(rng.uniform_int(1, 8));
    const int cols = static_cast<int>(rng.uniform_int(1, 8));
    DomainLabelMap labels({cols * 16, rows * 16}, 16, Domain::Source);
    std::vector<double> p(static_cast<std::size_t>(rows * cols));
    double oracle = 0.0;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const int d = static_cast<int>(rng.uniform_int(0, 1));
        const double v = rng.uniform_real(0.001, 0.999);
        labels.set(r, c, d ? Domain::Target : Domain::Source);
        p[static_cast<std::size_t>(r * cols + c)] = v;
        oracle += -(d * std::log(v) + (1 - d) * std::log(1.0 - v));
      }
    }
    const double got = adversarial_loss(prediction(rows, cols, p), labels).loss;
    worst_sum_err = std::max(worst_sum_err, std::abs(got - oracle));
  }

  // Central differences, step 1e-6, relative 1e-4.
  double worst_rel = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int rows = static_cast<int>(rng.uniform_int(1, 8));
    const int cols = static_cast<int>(rng.uniform_int(1, 8));
    DomainLabelMap labels({cols * 16, rows * 16}, 16, Domain::Source);
    std::vector<double> p(static_cast<std::size_t>(rows * cols));
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        labels.set(r, c, rng.uniform_int(0, 1) ? Domain::Target : Domain::Source);
        p[static_cast<std::size_t>(r * cols + c)] = rng.uniform_real(0.01, 0.99);
      }
    }
    const auto grad = adversarial_loss(prediction(rows, cols, p), labels).grad;
    for (std::size_t i = 0; i < p.size(); ++i) {
      auto plus = p, minus = p;
      plus[i] += 1e-6;
      minus[i] -= 1e-6;
      const double fd = (adversarial_loss(prediction(rows, cols, plus), labels).loss -
                         adversarial_loss(prediction(rows, cols, minus), labels).loss) / 2e-6;
      worst_rel = std::max(worst_rel, std::abs(fd - grad[i]) / std::abs(grad[i]));
    }
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "ln2 err=%.3g, sum-oracle max err=%.3g, fd max rel err=%.3g", sym_err,
                worst_sum_err, worst_rel);
  return {sym_err <= 1e-12 && worst_sum_err <= 1e-12 && worst_rel <= 1e-4, buf};
}

Outcome total_loss_arithmetic() {
  const double t = total_loss(1.0, 2.0, 3.0, 4.0, 0.1).total;
  const double zero_lambda = total_loss(1.5, 2.25, 9.0, 11.0, 0.0).total;
  char buf[160];
  std::snprintf(buf, sizeof buf, "total=%.17g, lambda=0 total=%.17g", t, zero_lambda);
  return {t == 3.7 && zero_lambda == 1.5 + 2.25, buf};
}

Outcome determinism() {
  testing::TempDir dir("ocdc_accept_det");
  PipelineConfig cfg = testing::synthetic_config(dir.path(), 20, 20, 99);
  cfg.epoch_length = 20;
  cfg.resize = true;
  cfg.strategy.position = PositionMode::Random;
  cfg.strategy.scaling = ScalingMode::Random;
  cfg.out_dir = dir.path() / "w1";
  cfg.workers = 1;
  run_augment(cfg);
  cfg.out_dir = dir.path() / "w8";
  cfg.workers = 8;
  run_augment(cfg);
  const auto a = testing::tree_hashes(dir.path() / "w1");
  const auto b = testing::tree_hashes(dir.path() / "w8");
  return {a == b && a.size() == 20 * 6 + 1, "20-image datasets, 20 iterations, files=" + std::to_string(a.size())};
}

Outcome verify_round_trip() {
  testing::TempDir dir("ocdc_accept_rt");
  PipelineConfig base = testing::synthetic_config(dir.path(), 8, 8, 5);
  base.epoch_length = 6;
  Rng rng(8080);
  int configs = 0, verify_failures = 0, undetected_tampers = 0, tampers = 0;
  for (auto position : {PositionMode::Fixed, PositionMode::Random}) {
    for (auto scaling : {ScalingMode::Fixed, ScalingMode::Random}) {
      for (double gamma : {0.25, 0.75}) {
        for (Rational fraction : {Rational{1, 1}, Rational{1, 4}}) {
          PipelineConfig cfg = base;
          cfg.strategy.position = position;
          cfg.strategy.scaling = scaling;
          cfg.strategy.gamma = gamma;
          cfg.target_fraction = fraction;
          cfg.out_dir = dir.path() / ("run_" + std::to_string(configs++));
          run_augment(cfg);
          if (!run_verify(cfg.out_dir).ok) ++verify_failures;

          for (std::size_t it = 0; it < cfg.epoch_length; ++it) {
            const fs::path d = cfg.out_dir / run_layout::iteration_dir(it);
            for (const char* name : {run_layout::kSourceLabels, run_layout::kTargetLabels, run_layout::kPastes}) {
              const fs::path p = d / name;
              const auto original = read_file(p);
              auto tampered = original;
              const auto pos = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(original.size()) - 1));
              tampered[pos] = static_cast<std::uint8_t>(tampered[pos] ^ rng.uniform_int(1, 255));
              write_file_atomic(p, tampered);
              ++tampers;
              if (run_verify(cfg.out_dir).ok) ++undetected_tampers;
              write_file_atomic(p, original);
            }
          }
          if (!run_verify(cfg.out_dir).ok) ++verify_failures;
        }
      }
    }
  }
  return {configs == 16 && verify_failures == 0 && undetected_tampers == 0,
          std::to_string(configs) + " configs, verify failures=" + std::to_string(verify_failures) +
              ", tampers=" + std::to_string(tampers) + " undetected=" + std::to_string(undetected_tampers)};
}

Outcome gamma_monotonicity() {
  // Crowded scene: 25 ground-truth boxes on each side, fixed seeds.
  Rng gen(555);
  const ImageSize src_size{800, 600}, tgt_size{640, 512};
  BatchSample sample;
  sample.source_item = {"src", testing::random_image(src_size.width, src_size.height, 3, gen), {}, Domain::Source};
  sample.target_item = {"tgt", testing::random_image(tgt_size.width, tgt_size.height, 1, gen), {}, Domain::Target};
  for (int i = 0; i < 25; ++i) sample.source_item.boxes.push_back(testing::random_box(gen, src_size, 10, 140));
  for (int i = 0; i < 25; ++i) sample.target_item.boxes.push_back(testing::random_box(gen, tgt_size, 10, 140));

  std::string detail = "accepted pastes at gamma 0.75/0.5/0.25/0.1:";
  std::size_t previous = static_cast<std::size_t>(-1);
  bool monotone = true;
  for (double gamma : {0.75, 0.5, 0.25, 0.1}) {
    PasteStrategy s;
    s.gamma = gamma;
    const auto out = augment_pair(sample, s, std::uint64_t{7});
    const std::size_t count = out.into_source.size() + out.into_target.size();
    detail += " " + std::to_string(count);
    monotone = monotone && count <= previous;
    previous = count;
  }
  return {monotone, detail + " (default fixed/fixed strategy)"};
}

Outcome resize_rule() {
  Rng rng(600);
  bool ok = true;
  std::string detail;
  for (auto [in, want] : {std::pair{ImageSize{2048, 1024}, ImageSize{1000, 500}},
                          std::pair{ImageSize{1280, 1024}, ImageSize{750, 600}}}) {
    AnnotatedImage item{"r", Image(in.width, in.height, 3, 50), {}, Domain::Source};
    for (int i = 0; i < 200; ++i) item.boxes.push_back(testing::random_box(rng, in, 1, 900));
    const AnnotatedImage out = resize_to_training(item);
    const bool size_ok = out.pixels.size() == want;
    const double sx = static_cast<double>(want.width) / in.width;
    const double sy = static_cast<double>(want.height) / in.height;
    bool boxes_ok = out.boxes.size() == item.boxes.size();
    for (std::size_t i = 0; boxes_ok && i < item.boxes.size(); ++i) {
      const BBox& a = item.boxes[i];
      const BBox& b = out.boxes[i];
      boxes_ok = b.w >= 1 && b.h >= 1 && b.x >= 0 && b.y >= 0 && b.x + b.w <= want.width &&
                 b.y + b.h <= want.height && std::abs(b.x - a.x * sx) <= 0.5 &&
                 std::abs(b.y - a.y * sy) <= 0.5 && std::abs((b.x + b.w) - (a.x + a.w) * sx) <= 1.0 &&
                 std::abs((b.y + b.h) - (a.y + a.h) * sy) <= 1.0 && b.class_id == a.class_id;
    }
    ok = ok && size_ok && boxes_ok;
    detail += std::to_string(in.width) + "x" + std::to_string(in.height) + "->" +
              std::to_string(out.pixels.width()) + "x" + std::to_string(out.pixels.height()) +
              (boxes_ok ? " boxes ok; " : " boxes BAD; ");
  }
  return {ok, detail};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"geometry-oracle", 5.0, geometry_oracle},
      {"algorithm-conformance", 60.0, algorithm_conformance},
      {"label-map-oracle", 0.0, ocdcdl_oracle},
      {"loss-correctness", 0.0, loss_correctness},
      {"total-loss-arithmetic", 0.0, total_loss_arithmetic},
      {"determinism-workers-1-vs-8", 120.0, determinism},
      {"verify-round-trip-and-tamper", 0.0, verify_round_trip},
      {"gamma-monotonicity", 0.0, gamma_monotonicity},
      {"resize-rule", 0.0, resize_rule},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (c.time_limit_s > 0 && secs >= c.time_limit_s) {
      o.pass = false;
      o.detail += " [over time limit]";
    }
    if (!o.pass) ++failures;
    std::printf("%s  %-30s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), secs, o.detail.c_str());
  }
  std::printf("note  cross-interface-equivalence is covered by the bindings package, not this suite\n");
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

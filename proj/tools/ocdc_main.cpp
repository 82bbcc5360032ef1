// Command-line front end: augment, subsample, verify, loss-check.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ocdc/annotations.hpp"
#include "ocdc/domain_labels.hpp"
#include "ocdc/image_io.hpp"
#include "ocdc/ingest.hpp"
#include "ocdc/losses.hpp"
#include "ocdc/pipeline.hpp"

namespace {

using nlohmann::json;

// One machine-readable line on stderr; callers return the exit code.
int report_error(const std::string& kind, const std::string& message, int code = 2) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
  return code;
}

void warn_fraction(const ocdc::Rational& r) {
  if (!ocdc::is_standard_fraction(r)) {
    std::cerr << json{{"warning", "fraction"},
                      {"message", "fraction " + ocdc::to_string(r) +
                                      " is not one of 1, 1/2, ..., 1/64"}}
                     .dump()
              << "\n";
  }
}

ocdc::PredictedDomainMap read_prediction(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open prediction map " + path);
  const json j = json::parse(in);
  ocdc::PredictedDomainMap pred;
  pred.rows = j.at("rows").get<int>();
  pred.cols = j.at("cols").get<int>();
  pred.values = j.at("values").get<std::vector<double>>();
  if (pred.rows < 1 || pred.cols < 1 ||
      pred.values.size() != static_cast<std::size_t>(pred.rows) * pred.cols) {
    throw std::invalid_argument("prediction map: values must hold rows*cols entries");
  }
  return pred;
}

// Expands `augment --config FILE` into flags placed before the user's own
// flags; with take-last option policy the explicit flags win.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args[0] != "augment") return args;
  std::string config_path;
  std::vector<std::string> rest;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  std::vector<std::string> out{"augment"};
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw CLI::FileError::Missing(config_path);
    for (const auto& item : CLI::ConfigTOML().from_config(in)) {
      if (!item.parents.empty()) {
        throw CLI::ConfigError("config sections are not supported: " + item.fullname());
      }
      std::string flag = "--" + item.name;
      std::replace(flag.begin() + 2, flag.end(), '_', '-');
      if (flag == "--no-resize") {
        if (item.inputs.size() == 1 && item.inputs[0] == "true") out.push_back(flag);
        continue;
      }
      out.push_back(flag);
      out.insert(out.end(), item.inputs.begin(), item.inputs.end());
    }
  }
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object-aware cross-domain CutMix augmentation and discriminator labels"};
  app.require_subcommand(1);

  // augment
  ocdc::PipelineConfig cfg;
  std::string position = "fixed";
  std::string scaling = "fixed";
  std::string fraction = "1";
  std::string source_images, source_ann, target_images, target_ann, out_dir;
  bool no_resize = false;
  auto* augment = app.add_subcommand("augment", "Run the augmentation pipeline");
  augment->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_file;
  augment->add_option("--config", config_file, "TOML-style key = value file; flags take precedence");
  augment->add_option("--source-images", source_images, "Source image directory")->required();
  augment->add_option("--source-ann", source_ann, "Source annotation JSON")->required();
  augment->add_option("--target-images", target_images, "Target image directory")->required();
  augment->add_option("--target-ann", target_ann, "Target annotation JSON")->required();
  augment->add_option("--out-dir", out_dir, "Output run directory")->required();
  augment->add_option("--position", position, "fixed | random")->capture_default_str();
  augment->add_option("--scaling", scaling, "fixed | random")->capture_default_str();
  augment->add_option("--scale-min", cfg.strategy.scale_min)->capture_default_str();
  augment->add_option("--scale-max", cfg.strategy.scale_max)->capture_default_str();
  augment->add_option("--gamma", cfg.strategy.gamma, "Overlap threshold")->capture_default_str();
  augment->add_option("--max-attempts", cfg.strategy.max_attempts)->capture_default_str();
  augment->add_option("--min-box-side", cfg.strategy.min_box_side)->capture_default_str();
  augment->add_option("--jitter", cfg.strategy.jitter_radius, "Fixed-position jitter radius")
      ->capture_default_str();
  augment->add_option("--stride", cfg.stride, "Feature stride of the label maps")->capture_default_str();
  augment->add_option("--target-fraction", fraction, "1, 1/2, ..., 1/64")->capture_default_str();
  augment->add_option("--epoch-length", cfg.epoch_length, "Number of iterations")->required();
  augment->add_option("--seed", cfg.seed)->capture_default_str();
  augment->add_flag("--no-resize", no_resize, "Keep the original resolution");
  augment->add_option("--workers", cfg.workers)->capture_default_str();

  // subsample
  std::string sub_ann, sub_images = ".", sub_domain = "target", sub_fraction, sub_out;
  std::uint64_t sub_seed = 0;
  auto* sub = app.add_subcommand("subsample", "Write a seeded subset of an annotation file");
  sub->add_option("--annotations", sub_ann)->required();
  sub->add_option("--images", sub_images)->capture_default_str();
  sub->add_option("--domain", sub_domain, "source | target")->capture_default_str();
  sub->add_option("--fraction", sub_fraction)->required();
  sub->add_option("--seed", sub_seed)->capture_default_str();
  sub->add_option("--out", sub_out)->required();

  // verify
  std::string run_dir;
  auto* verify = app.add_subcommand("verify", "Re-check every artifact of a run directory");
  verify->add_option("run_dir", run_dir)->required();

  // loss-check
  std::string pred_path, labels_path, reduction = "sum";
  int loss_stride = 16;
  auto* loss = app.add_subcommand("loss-check", "Adversarial loss of a prediction map vs a label map");
  loss->add_option("--pred", pred_path, "JSON {rows, cols, values}")->required();
  loss->add_option("--labels", labels_path, "Label map PGM")->required();
  loss->add_option("--reduction", reduction, "sum | mean")->capture_default_str();
  loss->add_option("--stride", loss_stride)->capture_default_str();

  try {
    auto args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what());
  }

  try {
    if (*augment) {
      cfg.source_images = source_images;
      cfg.source_ann = source_ann;
      cfg.target_images = target_images;
      cfg.target_ann = target_ann;
      cfg.out_dir = out_dir;
      cfg.resize = !no_resize;
      try {
        cfg.strategy.position = ocdc::parse_position_mode(position);
        cfg.strategy.scaling = ocdc::parse_scaling_mode(scaling);
        cfg.target_fraction = ocdc::parse_rational(fraction);
      } catch (const std::invalid_argument& e) {
        return report_error("config", e.what());
      }
      warn_fraction(cfg.target_fraction);
      const auto manifest = ocdc::run_augment(cfg);
      std::cout << json{{"status", "ok"},
                        {"iterations", manifest.iterations},
                        {"files", manifest.files},
                        {"out_dir", out_dir}}
                       .dump()
                << "\n";
      return 0;
    }
    if (*sub) {
      const auto frac = ocdc::parse_rational(sub_fraction);
      warn_fraction(frac);
      const auto ds = ocdc::load_annotations(sub_images, sub_ann, ocdc::parse_domain(sub_domain));
      const auto kept = ocdc::subsample(ds, frac, sub_seed);
      ocdc::AnnotationDocument doc;
      doc.classes = kept.class_names;
      for (const auto& item : kept.items) doc.images.push_back(*item);
      ocdc::write_file_atomic(sub_out, ocdc::to_json(doc).dump(2) + "\n");
      std::cout << json{{"status", "ok"}, {"input_items", ds.size()}, {"kept_items", kept.size()}}.dump()
                << "\n";
      return 0;
    }
    if (*verify) {
      const auto report = ocdc::run_verify(run_dir);
      std::cout << report.to_json().dump(2) << "\n";
      return report.ok ? 0 : 1;
    }
    if (*loss) {
      if (reduction != "sum" && reduction != "mean") {
        return report_error("usage", "--reduction must be sum or mean");
      }
      auto pred = read_prediction(pred_path);
      const auto raster = ocdc::decode_pgm(ocdc::read_file(labels_path));
      const ocdc::ImageSize size{raster.width() * loss_stride, raster.height() * loss_stride};
      const auto labels = ocdc::DomainLabelMap::from_image(raster, size, loss_stride);
      pred.image_size = size;
      pred.stride = loss_stride;
      const auto result = ocdc::adversarial_loss(
          pred, labels, reduction == "mean" ? ocdc::Reduction::Mean : ocdc::Reduction::Sum);
      json out{{"loss", result.loss}, {"cells", pred.values.size()}, {"reduction", reduction}};
      std::cout << out.dump() << "\n";
      return 0;
    }
  } catch (const ocdc::ConfigError& e) {
    return report_error("config", e.what());
  } catch (const ocdc::IngestError& e) {
    return report_error("ingest", e.what());
  } catch (const ocdc::ImageIoError& e) {
    return report_error("io", e.what());
  } catch (const std::exception& e) {
    return report_error("runtime", e.what());
  }
  return 0;
}

#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "ocdc/image_io.hpp"
#include "ocdc/pipeline.hpp"
#include "support/synthetic.hpp"

namespace ocdc::testing {

/// relative path -> sha256 for every regular file under root.
inline std::map<std::string, std::string> tree_hashes(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      out[std::filesystem::relative(e.path(), root).generic_string()] = sha256_hex(read_file(e.path()));
    }
  }
  return out;
}

/// Pipeline config over two synthetic datasets written under root.
inline PipelineConfig synthetic_config(const std::filesystem::path& root, int source_count = 6,
                                       int target_count = 4, std::uint64_t data_seed = 1) {
  SyntheticSpec src;
  src.id_prefix = "src";
  src.domain = Domain::Source;
  src.count = source_count;
  src.width = 256;
  src.height = 192;
  src.seed = data_seed;
  SyntheticSpec tgt = src;
  tgt.id_prefix = "tgt";
  tgt.domain = Domain::Target;
  tgt.count = target_count;
  tgt.width = 224;
  tgt.height = 180;
  tgt.channels = 1;
  tgt.seed = data_seed + 1000;
  const auto s = write_synthetic_dataset(root, src);
  const auto t = write_synthetic_dataset(root, tgt);

  PipelineConfig cfg;
  cfg.source_images = s.images_dir;
  cfg.source_ann = s.annotations;
  cfg.target_images = t.images_dir;
  cfg.target_ann = t.annotations;
  cfg.out_dir = root / "run";
  cfg.epoch_length = 5;
  cfg.seed = 7;
  cfg.resize = false;
  return cfg;
}

}  // namespace ocdc::testing

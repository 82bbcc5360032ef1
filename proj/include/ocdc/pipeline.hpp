#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ocdc/ingest.hpp"
#include "ocdc/paste.hpp"

namespace ocdc {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PipelineConfig {
  std::filesystem::path source_images;
  std::filesystem::path source_ann;
  std::filesystem::path target_images;
  std::filesystem::path target_ann;
  std::filesystem::path out_dir;
  PasteStrategy strategy;
  int stride = 16;
  Rational target_fraction{1, 1};
  std::size_t epoch_length = 0;
  std::uint64_t seed = 0;
  bool resize = true;
  int workers = 1;

  /// Throws ConfigError.
  void validate() const;

  /// Everything that determines artifact content. Execution-only settings
  /// (out_dir, workers) are left out so they cannot change the manifest.
  nlohmann::json echo() const;
};

/// Paths inside a run directory.
namespace run_layout {
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kSourceImage = "source.png";
inline constexpr const char* kTargetImage = "target.png";
inline constexpr const char* kAnnotations = "annotations.json";
inline constexpr const char* kSourceLabels = "source_labels.pgm";
inline constexpr const char* kTargetLabels = "target_labels.pgm";
inline constexpr const char* kPastes = "pastes.json";

std::string iteration_dir(std::size_t iteration);
}  // namespace run_layout

struct RunManifest {
  nlohmann::json json;
  std::size_t iterations = 0;
  std::size_t files = 0;
};

/// Loads both datasets, subsamples the target, pairs batches and writes one
/// directory of artifacts per iteration, then the manifest. Iterations are
/// spread over `workers` threads; output bytes do not depend on the count.
RunManifest run_augment(const PipelineConfig& config);

struct Diagnostic {
  std::string file;
  std::string check;
  std::string message;
};

struct VerifyReport {
  bool ok = true;
  std::size_t iterations_checked = 0;
  std::size_t files_hashed = 0;
  std::vector<Diagnostic> diagnostics;

  nlohmann::json to_json() const;
};

/// Re-reads a run directory and re-checks every artifact. Problems are
/// collected as diagnostics; this does not throw on corrupt input.
VerifyReport run_verify(const std::filesystem::path& run_dir);

}  // namespace ocdc

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "cnc/cnc.hpp"
#include "cnc/mlp.hpp"
#include "cnc/polytope.hpp"

namespace cnc::cli {

/// Invalid or inconsistent configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct DatasetSpec {
  std::string kind = "two_moons";  // two_moons | clusters | cifar10_binary
  int n_per_class = 500;
  int test_n_per_class = 250;
  double noise = 0.1;
  int classes = 4;
  double sigma = 0.25;
  double side = 2.0;
  std::vector<std::string> files;
  std::vector<std::string> test_files;
  int limit = 0;  // 0 keeps every record
  int downsample = 1;

  bool planar() const { return kind != "cifar10_binary"; }
};

struct GenerateSpec {
  int count = 0;  // ID samples fed to the generator, 0 = all
  int previews = 16;
};

struct EvalSpec {
  std::string checkpoint = "model.ckpt";
  std::string ood = "ring";  // ring | box (planar); files | noise | corruption (images)
  int ood_count = 1000;
  double ring_factor = 3.0;
  double box_factor = 1.5;
  std::vector<std::string> ood_files;
  std::string ood_corruption = "gaussian_noise";
  int ood_severity = 5;
  int ece_bins = 15;
};

struct PolytopeSpec {
  std::string checkpoint = "model.ckpt";
  double domain_factor = 1.5;
  AreaMetric metric = AreaMetric::region;
};

struct DiversitySpec {
  std::string reference_checkpoint;  // empty: train a K-class reference
  std::vector<Variant> variants{Variant::pbcc_only, Variant::corruption_only, Variant::r_cnc, Variant::cnc};
  int samples = 0;  // 0 = one per ID sample
};

struct Fig2Spec {
  int samples = 1000;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  DatasetSpec dataset;
  GenConfig gen;
  std::string severity_table;  // empty: built-in table
  std::vector<int> hidden{32, 32};
  TrainConfig train;
  GenerateSpec generate;
  EvalSpec eval;
  PolytopeSpec polytope;
  DiversitySpec diversity;
  Fig2Spec fig2;

  std::filesystem::path output_dir = "out";
};

/// Parses a YAML document, applies "a.b=value" overrides, fills defaults and
/// validates. `source` names the document in error messages.
ExperimentConfig parse_config(const std::string& text, const std::string& source,
                              const std::vector<std::string>& overrides = {});

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Fully resolved config as YAML; output_dir is left out so the document is
/// identical wherever the outputs land.
std::string emit_config(const ExperimentConfig& cfg);

/// Cross-field checks and file existence; throws ConfigError.
void validate(const ExperimentConfig& cfg);

/// Derived child seeds, so one top-level seed drives every stream.
struct Seeds {
  RngStream data;
  RngStream test_data;
  RngStream init;
  std::uint64_t gen = 0;
  std::uint64_t train = 0;
  RngStream eval;
  RngStream fig2;
  RngStream diversity;
  RngStream generate;
};

Seeds derive_seeds(std::uint64_t seed);

}  // namespace cnc::cli

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "cnc/mlp.hpp"
#include "cnc/tensor.hpp"

namespace cnc::cli {

/// Training or test data in whichever form the dataset kind produces.
struct Data {
  bool planar = true;
  Point2Dataset points;
  LabeledImageSet images;

  int class_count() const { return planar ? points.class_count : images.class_count; }
  std::size_t size() const { return planar ? points.size() : images.size(); }
  int input_dim() const;
  Batch batch() const { return planar ? to_batch(points) : to_batch(images); }
};

Data load_train_data(const ExperimentConfig& cfg);
Data load_test_data(const ExperimentConfig& cfg);
SeverityTable load_severity_table(const ExperimentConfig& cfg);
std::vector<int> model_dims(const ExperimentConfig& cfg, const Data& data, Variant variant);

void cmd_generate(const ExperimentConfig& cfg, std::ostream& log);
void cmd_train(const ExperimentConfig& cfg, std::ostream& log);
void cmd_eval(const ExperimentConfig& cfg, std::ostream& log);
void cmd_polytope(const ExperimentConfig& cfg, std::ostream& log);
void cmd_diversity(const ExperimentConfig& cfg, std::ostream& log);
void cmd_fig2(const ExperimentConfig& cfg, std::ostream& log);

const std::vector<std::string>& command_names();

/// Dispatches by name; throws std::invalid_argument for an unknown command.
void run_command(const std::string& name, const ExperimentConfig& cfg, std::ostream& log);

}  // namespace cnc::cli

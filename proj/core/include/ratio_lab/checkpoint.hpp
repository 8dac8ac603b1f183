#ifndef RATIO_LAB_CHECKPOINT_HPP_
#define RATIO_LAB_CHECKPOINT_HPP_

#include <string>

#include "ratio_lab/generator.hpp"
#include "ratio_lab/ratio_estimator.hpp"
#include "ratio_lab/score_net.hpp"

namespace ratio_lab {
namespace checkpoint {

/// Checkpoints are JSON records of {layer_dims, activation tag, params,
/// optimizer state} plus per-kind metadata; all double fields round-trip
/// exactly. The classifier record carries the label-convention tag
/// {"y1": "data", "y0": "model"} so orientation stays auditable.

std::string ratio_estimator_to_json(const RatioEstimator& est);
RatioEstimator ratio_estimator_from_json(const std::string& text);

std::string score_net_to_json(const ScoreNet& net);
ScoreNet score_net_from_json(const std::string& text);

std::string generator_to_json(const Generator& gen);
Generator generator_from_json(const std::string& text);

/// Whole-file helpers. read_file throws MissingArtifactError when the path
/// does not exist.
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace checkpoint
}  // namespace ratio_lab

#endif  // RATIO_LAB_CHECKPOINT_HPP_

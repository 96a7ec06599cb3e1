#pragma once

#include <iosfwd>

#include <json.hpp>

#include "uqsa/distributions.hpp"
#include "uqsa/gp.hpp"
#include "uqsa/pce.hpp"

namespace uqsa {

using Json = nlohmann::ordered_json;

Json marginal_to_json(const Marginal& m);
Marginal marginal_from_json(const Json& j);
Json input_model_to_json(const InputModel& model);
InputModel input_model_from_json(const Json& j);

Json trend_to_json(const TrendSpec& t);
/// Accepts "constant", "linear" or a list of exponent tuples.
TrendSpec trend_from_json(const Json& j, int dim);

/// Family tags, index set, coefficients, errors, design seed and degree trials.
class PceSerializer {
 public:
  static Json to_json(const PceModel& model);
  static PceModel from_json(const Json& j);
};

/// Design, responses, trend exponents, kernel with fitted hyperparameters,
/// beta, nugget and an optimizer summary. Reading re-factorizes the model at
/// the stored hyperparameters.
class GpSerializer {
 public:
  static Json to_json(const GpModel& model);
  static GpModel from_json(const Json& j);
};

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace uqsa

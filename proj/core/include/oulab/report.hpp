#pragma once

#include "oulab/types.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace oulab {

using ojson = nlohmann::ordered_json;

/// Common verification record. Serializes as
/// {check, parameters, defect, tolerance, pass, details?}.
struct CheckReport {
  std::string check;
  ojson parameters = ojson::object();
  double defect = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  ojson details = ojson::object();

  [[nodiscard]] ojson to_json() const;
};

/// JSON array of vector entries; non-finite values become null.
ojson to_json(const Vector& v);
ojson to_json(const Matrix& m);
/// A double, or null when it is not finite.
ojson number(double v);

}  // namespace oulab

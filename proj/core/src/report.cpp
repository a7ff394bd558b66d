#include "oulab/report.hpp"

#include <cmath>

namespace oulab {

ojson number(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

ojson CheckReport::to_json() const {
  ojson j;
  j["check"] = check;
  j["parameters"] = parameters;
  j["defect"] = number(defect);
  j["tolerance"] = number(tolerance);
  j["pass"] = pass;
  if (!details.empty()) j["details"] = details;
  return j;
}

ojson to_json(const Vector& v) {
  ojson a = ojson::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

ojson to_json(const Matrix& m) {
  ojson a = ojson::array();
  for (int i = 0; i < m.rows(); ++i) {
    ojson row = ojson::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    a.push_back(row);
  }
  return a;
}

}  // namespace oulab

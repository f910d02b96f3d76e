#pragma once

#include <string>

#include "eofm/field.hpp"

namespace eofm {

/// Accuracy of an estimated displacement field against ground truth.
/// Relative errors are 100 * ||estimate - truth||_2 / ||truth||_2 (discrete L2
/// norm, per component for u1 and u2); they are NaN when the truth norm is zero.
struct ErrorReport {
  double e_rel_u = 0.0;
  double e_rel_u1 = 0.0;
  double e_rel_u2 = 0.0;
  double max_abs_u1 = 0.0;
  double max_abs_u2 = 0.0;
  ScalarField abs_map_u1;
  ScalarField abs_map_u2;

  bool relative_defined() const noexcept;
};

ErrorReport compare(const VectorField& estimate, const VectorField& truth);

/// `key = value` lines, one per scalar metric.
std::string to_key_value(const ErrorReport& report);
std::string csv_header();
std::string csv_row(const ErrorReport& report);

}  // namespace eofm

#include "eofm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace eofm {

bool ErrorReport::relative_defined() const noexcept {
  return std::isfinite(e_rel_u) && std::isfinite(e_rel_u1) && std::isfinite(e_rel_u2);
}

ErrorReport compare(const VectorField& estimate, const VectorField& truth) {
  require_same_geometry(estimate.geometry(), truth.geometry(), "compare");
  const auto& g = truth.geometry();
  ErrorReport r;
  r.abs_map_u1 = ScalarField(g);
  r.abs_map_u2 = ScalarField(g);
  double diff1 = 0.0;
  double diff2 = 0.0;
  double norm1 = 0.0;
  double norm2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d1 = estimate.u1()[i] - truth.u1()[i];
    const double d2 = estimate.u2()[i] - truth.u2()[i];
    r.abs_map_u1[i] = std::abs(d1);
    r.abs_map_u2[i] = std::abs(d2);
    r.max_abs_u1 = std::max(r.max_abs_u1, r.abs_map_u1[i]);
    r.max_abs_u2 = std::max(r.max_abs_u2, r.abs_map_u2[i]);
    diff1 += d1 * d1;
    diff2 += d2 * d2;
    norm1 += truth.u1()[i] * truth.u1()[i];
    norm2 += truth.u2()[i] * truth.u2()[i];
  }
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  // The cell area cancels in every ratio.
  auto ratio = [](double num, double den) { return den > 0.0 ? 100.0 * std::sqrt(num / den) : nan; };
  r.e_rel_u = ratio(diff1 + diff2, norm1 + norm2);
  r.e_rel_u1 = ratio(diff1, norm1);
  r.e_rel_u2 = ratio(diff2, norm2);
  return r;
}

namespace {
std::string fmt(double v) {
  if (!std::isfinite(v)) return "undefined";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}
}  // namespace

std::string to_key_value(const ErrorReport& r) {
  std::string s;
  s += "relative_error_definition = 100*||estimate-truth||_L2/||truth||_L2\n";
  s += "e_rel_u = " + fmt(r.e_rel_u) + "\n";
  s += "e_rel_u1 = " + fmt(r.e_rel_u1) + "\n";
  s += "e_rel_u2 = " + fmt(r.e_rel_u2) + "\n";
  s += "max_abs_u1 = " + fmt(r.max_abs_u1) + "\n";
  s += "max_abs_u2 = " + fmt(r.max_abs_u2) + "\n";
  return s;
}

std::string csv_header() { return "e_rel_u,e_rel_u1,e_rel_u2,max_abs_u1,max_abs_u2"; }

std::string csv_row(const ErrorReport& r) {
  return fmt(r.e_rel_u) + "," + fmt(r.e_rel_u1) + "," + fmt(r.e_rel_u2) + "," +
         fmt(r.max_abs_u1) + "," + fmt(r.max_abs_u2);
}

}  // namespace eofm

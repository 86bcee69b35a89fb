#pragma once

// Self-contained SVG figures: regret curves with quantile bands, and CDF
// envelopes from the density demo.

#include <span>
#include <string>
#include <vector>

#include "dpps/harness.hpp"

namespace dpps {

struct PlotStyle {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 800;
  int height = 500;
};

/// Upper end of a linear axis covering [0, value]: the first multiple of a
/// 1/2/5 x 10^k step at or above `value`.
double nice_axis_max(double value);

/// Mean curve plus shaded [q_lo, q_hi] band per agent, with a legend. The
/// y axis starts at zero and ends at nice_axis_max(max q_hi); the root
/// element records the limits in data-x-max and data-y-max.
std::string render_regret_svg(const std::vector<AgentSummary>& summaries, const PlotStyle& style = {});

struct CdfEnvelopeSeries {
  std::vector<double> grid;
  std::vector<double> lower;
  std::vector<double> median;
  std::vector<double> upper;
  std::vector<double> observations;  ///< drawn as a rug; may be empty
};

std::string render_cdf_svg(const CdfEnvelopeSeries& series, const PlotStyle& style = {});

}  // namespace dpps

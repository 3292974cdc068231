#pragma once

#include <string>

#include "tdlab/csv.hpp"

namespace tdlab {

// SVG of a theory, limits, simulate, validate or phase table. Axes go
// logarithmic when the data spans more than two decades unless style is
// "linear" ("log" forces it). Empty tables throw ConfigError.
std::string render_plot(const CsvTable& t, const std::string& style = "auto");

}  // namespace tdlab

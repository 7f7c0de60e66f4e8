#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cifboot/step_function.hpp"

namespace cifboot::cli {

/// %.17g; "inf"/"-inf"/"nan" for non-finite values.
std::string format_number(double x);

/// time,value rows: the initial value at time 0, then one row per jump.
std::string step_function_csv(const StepFunction& fn);

/// Parses a two-column piecewise-constant table (header, then start,value
/// rows; the first start must be 0).
std::pair<std::vector<double>, std::vector<double>> read_step_table(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace cifboot::cli

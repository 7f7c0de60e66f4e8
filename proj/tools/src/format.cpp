#include "cifboot/cli/format.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cifboot/error.hpp"

namespace cifboot::cli {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string step_function_csv(const StepFunction& fn) {
  std::string text = "time,value\n";
  text += "0," + format_number(fn.initial_value()) + "\n";
  const auto times = fn.jump_times();
  const auto values = fn.values();
  for (std::size_t k = 0; k < times.size(); ++k) {
    text += format_number(times[k]) + "," + format_number(values[k]) + "\n";
  }
  return text;
}

std::pair<std::vector<double>, std::vector<double>> read_step_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::vector<double> starts;
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 || line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw InputError("expected 'start,value' at line " + std::to_string(line_no));
    }
    auto parse = [&](std::string_view text) {
      while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
      while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw InputError("invalid number '" + std::string(text) + "' at line " + std::to_string(line_no));
      }
      return v;
    };
    const std::string_view view(line);
    starts.push_back(parse(view.substr(0, comma)));
    values.push_back(parse(view.substr(comma + 1)));
  }
  if (starts.empty() || starts.front() != 0.0) {
    throw InputError("step table '" + path.string() + "' must start at time 0");
  }
  return {std::move(starts), std::move(values)};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace cifboot::cli

#include "cifboot/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <string_view>

#include "cifboot/error.hpp"

namespace cifboot {

Observation make_observation(double entry, double exit, Status status) {
  if (!std::isfinite(entry) || !std::isfinite(exit)) {
    throw InputError("observation times must be finite");
  }
  if (entry < 0.0) {
    throw InputError("entry time must be nonnegative");
  }
  if (!(exit > entry)) {
    throw InputError("exit time must exceed entry time");
  }
  return Observation{entry, exit, status};
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view text, T& value) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc{} && ptr == end;
}

std::string at_line(std::size_t line) { return " at line " + std::to_string(line); }

}  // namespace

Sample parse_csv(std::istream& in, const CsvFormat& format) {
  std::string line;
  std::size_t line_no = 0;

  // header: first non-blank line
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    for (auto f : split_fields(line)) header.emplace_back(f);
    break;
  }
  if (header.empty()) throw InputError("no observations");

  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    if (name.empty()) return std::nullopt;
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto entry_col = column(format.entry_column);
  const auto exit_col = column(format.exit_column);
  const auto status_col = column(format.status_column);
  if (!exit_col) throw InputError("missing exit column '" + format.exit_column + "'");
  if (!status_col) throw InputError("missing status column '" + format.status_column + "'");

  Sample sample;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw InputError("malformed row (expected " + std::to_string(header.size()) +
                       " fields, found " + std::to_string(fields.size()) + ")" + at_line(line_no));
    }
    double entry = 0.0;
    double exit = 0.0;
    long code = 0;
    if (entry_col && !parse_number(fields[*entry_col], entry)) {
      throw InputError("malformed entry value '" + std::string(fields[*entry_col]) + "'" +
                       at_line(line_no));
    }
    if (!parse_number(fields[*exit_col], exit)) {
      throw InputError("malformed exit value '" + std::string(fields[*exit_col]) + "'" +
                       at_line(line_no));
    }
    if (!parse_number(fields[*status_col], code)) {
      throw InputError("malformed status value '" + std::string(fields[*status_col]) + "'" +
                       at_line(line_no));
    }
    Status status;
    if (code == format.censored_code) {
      status = Status::Censored;
    } else if (code == format.cause1_code) {
      status = Status::Cause1;
    } else if (code == format.cause2_code) {
      status = Status::Cause2;
    } else {
      throw InputError("unknown status code " + std::to_string(code) + at_line(line_no));
    }
    try {
      sample.observations.push_back(make_observation(entry, exit, status));
    } catch (const InputError& e) {
      throw InputError(std::string(e.what()) + at_line(line_no));
    }
  }
  if (sample.empty()) throw InputError("no observations");
  return sample;
}

Sample ingest_csv(const std::filesystem::path& path, const CsvFormat& format) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  Sample sample = parse_csv(in, format);
  sample.group_label = path.stem().string();
  return sample;
}

CountingProcessPanel::CountingProcessPanel(const Sample& sample) {
  if (sample.empty()) throw InputError("no observations");
  const auto n = sample.size();
  sample_size_ = n;

  sorted_exits_.reserve(n);
  sorted_entries_.reserve(n);
  for (const auto& obs : sample.observations) {
    sorted_exits_.push_back(obs.exit);
    sorted_entries_.push_back(obs.entry);
  }
  std::sort(sorted_exits_.begin(), sorted_exits_.end());
  std::sort(sorted_entries_.begin(), sorted_entries_.end());

  times_ = sorted_exits_;
  times_.erase(std::unique(times_.begin(), times_.end()), times_.end());

  const auto g = times_.size();
  at_risk_.resize(g);
  d1_.assign(g, 0);
  d2_.assign(g, 0);
  for (std::size_t k = 0; k < g; ++k) at_risk_[k] = at_risk_at(times_[k]);

  jumps_.reserve(n);
  for (const auto& obs : sample.observations) {
    const auto k = static_cast<std::size_t>(
        std::lower_bound(times_.begin(), times_.end(), obs.exit) - times_.begin());
    jumps_.push_back({k, obs.status});
    if (obs.status == Status::Cause1) {
      ++d1_[k];
      ++event_count_;
    } else if (obs.status == Status::Cause2) {
      ++d2_[k];
      ++event_count_;
    }
  }
}

std::span<const std::size_t> CountingProcessPanel::events(int cause) const {
  if (cause == 1) return d1_;
  if (cause == 2) return d2_;
  throw InputError("cause must be 1 or 2");
}

std::size_t CountingProcessPanel::at_risk_at(double t) const {
  // #{exit >= t} - #{entry >= t}; entry >= t implies exit > t.
  const auto exits_ge = static_cast<std::size_t>(
      sorted_exits_.end() - std::lower_bound(sorted_exits_.begin(), sorted_exits_.end(), t));
  const auto entries_ge = static_cast<std::size_t>(
      sorted_entries_.end() - std::lower_bound(sorted_entries_.begin(), sorted_entries_.end(), t));
  return exits_ge - entries_ge;
}

bool CountingProcessPanel::same_processes(const CountingProcessPanel& other) const {
  return sample_size_ == other.sample_size_ && times_ == other.times_ &&
         at_risk_ == other.at_risk_ && d1_ == other.d1_ && d2_ == other.d2_;
}

CountingProcessPanel compile_panel(const Sample& sample) { return CountingProcessPanel(sample); }

RiskDiagnostic check_positive_risk(const CountingProcessPanel& panel, double horizon) {
  if (!(horizon > 0.0)) throw InputError("horizon must be positive");
  RiskDiagnostic report;
  report.horizon = horizon;

  const auto n = static_cast<double>(panel.sample_size());
  const auto times = panel.times();
  const auto risk = panel.at_risk();
  double min_fraction = 1.0;
  bool any = false;
  for (std::size_t k = 0; k < times.size() && times[k] <= horizon; ++k) {
    min_fraction = std::min(min_fraction, static_cast<double>(risk[k]) / n);
    any = true;
  }
  report.min_risk_fraction = any ? min_fraction : static_cast<double>(panel.at_risk_at(horizon)) / n;

  // Y is constant on (p_k, p_{k+1}] between consecutive entry/exit breakpoints.
  std::vector<double> points{0.0};
  points.insert(points.end(), panel.sorted_entries().begin(), panel.sorted_entries().end());
  points.insert(points.end(), times.begin(), times.end());
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    if (!(points[k] < horizon)) break;
    if (panel.at_risk_at(points[k + 1]) == 0) {
      report.zero_risk_from = points[k];
      return report;
    }
  }
  if (points.back() < horizon) report.zero_risk_from = points.back();
  return report;
}

}  // namespace cifboot

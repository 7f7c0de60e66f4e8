#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cifboot {

enum class Status : std::uint8_t { Censored = 0, Cause1 = 1, Cause2 = 2 };

/// One subject: left-truncation (entry) time, observed exit time min(T, C)
/// and the exit status.
struct Observation {
  double entry = 0.0;
  double exit = 0.0;
  Status status = Status::Censored;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Validating constructor; throws InputError unless 0 <= entry < exit and both
/// are finite.
Observation make_observation(double entry, double exit, Status status);

struct Sample {
  std::vector<Observation> observations;
  std::optional<std::string> group_label;

  std::size_t size() const noexcept { return observations.size(); }
  bool empty() const noexcept { return observations.empty(); }
};

/// Column mapping for CSV ingestion. An empty entry column name, or a file
/// without that column, means no left truncation.
struct CsvFormat {
  std::string entry_column = "entry";
  std::string exit_column = "exit";
  std::string status_column = "status";
  long censored_code = 0;
  long cause1_code = 1;
  long cause2_code = 2;
};

Sample parse_csv(std::istream& in, const CsvFormat& format = {});
Sample ingest_csv(const std::filesystem::path& path, const CsvFormat& format = {});

struct SubjectJump {
  std::size_t time_index = 0;
  Status status = Status::Censored;

  friend bool operator==(const SubjectJump&, const SubjectJump&) = default;
};

/// Counting-process form of a sample on the grid of distinct exit times.
///
/// at_risk(k) = #{i : entry_i < t_k <= exit_i}. Tied exits share the risk
/// set, so events and censorings at a common time both see the pre-tie count.
/// Times are compared exactly; no epsilon merging.
class CountingProcessPanel {
 public:
  explicit CountingProcessPanel(const Sample& sample);

  std::size_t sample_size() const noexcept { return sample_size_; }
  std::size_t grid_size() const noexcept { return times_.size(); }

  std::span<const double> times() const noexcept { return times_; }
  std::span<const std::size_t> at_risk() const noexcept { return at_risk_; }
  std::span<const std::size_t> events1() const noexcept { return d1_; }
  std::span<const std::size_t> events2() const noexcept { return d2_; }
  std::span<const std::size_t> events(int cause) const;

  /// One record per observation, in sample order. Censored observations
  /// carry Status::Censored and the index of their exit time.
  std::span<const SubjectJump> subject_jumps() const noexcept { return jumps_; }

  /// Y(t) at an arbitrary time, same convention as at_risk().
  std::size_t at_risk_at(double t) const;

  std::span<const double> sorted_entries() const noexcept { return sorted_entries_; }

  double last_exit() const noexcept { return times_.back(); }
  std::size_t event_count() const noexcept { return event_count_; }

  /// Compares the aggregated processes (times, Y, d1, d2); subject order is
  /// ignored.
  bool same_processes(const CountingProcessPanel& other) const;

 private:
  std::size_t sample_size_ = 0;
  std::size_t event_count_ = 0;
  std::vector<double> times_;
  std::vector<std::size_t> at_risk_;
  std::vector<std::size_t> d1_;
  std::vector<std::size_t> d2_;
  std::vector<SubjectJump> jumps_;
  std::vector<double> sorted_entries_;
  std::vector<double> sorted_exits_;
};

CountingProcessPanel compile_panel(const Sample& sample);

/// Finite-sample check of the positive-risk requirement on (0, horizon].
struct RiskDiagnostic {
  double horizon = 0.0;
  /// min over grid times t <= horizon of Y(t)/n.
  double min_risk_fraction = 0.0;
  /// Left end of the first interval inside (0, horizon] on which Y = 0.
  std::optional<double> zero_risk_from;

  bool positive() const noexcept { return !zero_risk_from.has_value(); }
};

RiskDiagnostic check_positive_risk(const CountingProcessPanel& panel, double horizon);

}  // namespace cifboot

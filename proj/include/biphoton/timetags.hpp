#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "biphoton/gating.hpp"
#include "biphoton/montecarlo.hpp"

namespace biphoton {

/// Malformed or unusable input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One pre-paired coincidence as stored in a time-tag file.
struct TimeTagRecord {
  std::uint64_t pair_id;
  double tau_meas;  // ps
  PolarizationBasis basis;
  bool co_polarized;

  friend bool operator==(const TimeTagRecord&, const TimeTagRecord&) = default;
};

inline constexpr const char* kTimeTagHeader = "pair_id,tau_meas_ps,basis,outcome";

/// Shortest decimal that round-trips, in fixed notation, with at least three
/// fractional digits.
std::string format_delay(double tau_ps);

/// pair_id is the event index.
std::vector<TimeTagRecord> to_records(std::span<const PairEvent> events);

void write_timetags(std::ostream& out, std::span<const TimeTagRecord> records);

/// Parses a time-tag file. Throws DataError naming the line on malformed
/// rows, a wrong header, or a non-increasing pair_id.
std::vector<TimeTagRecord> read_timetags(std::istream& in);
std::vector<TimeTagRecord> read_timetags_file(const std::string& path);

CorrelationCounts tally(std::span<const TimeTagRecord> records, const GateSet& gates);

struct AnalysisReport {
  CorrelationCounts counts;
  Estimate estimate;
};

/// Gates the records and runs the same estimator as the Monte-Carlo path.
/// Missing basis after gating raises InsufficientCounts.
AnalysisReport analyze_timetags(const std::string& path, const GateWindow& gate);
AnalysisReport analyze_records(std::span<const TimeTagRecord> records, const GateWindow& gate);

/// basis,n_co,n_cross,C,sigma rows followed by a fidelity row.
void write_report(std::ostream& out, const AnalysisReport& report);

}  // namespace biphoton

#include "biphoton/timetags.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "format.hpp"

namespace biphoton {

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t begin = 0;
  while (true) {
    const std::size_t comma = line.find(',', begin);
    fields.push_back(line.substr(begin, comma - begin));
    if (comma == std::string_view::npos) break;
    begin = comma + 1;
  }
  return fields;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw DataError("line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

std::string format_delay(double tau_ps) {
  char buf[512];
  const auto res = std::to_chars(buf, buf + sizeof(buf), tau_ps, std::chars_format::fixed);
  std::string s(buf, res.ptr);
  const std::size_t dot = s.find('.');
  const std::size_t decimals = dot == std::string::npos ? 0 : s.size() - dot - 1;
  if (dot == std::string::npos) s += '.';
  if (decimals < 3) s.append(3 - decimals, '0');
  return s;
}

std::vector<TimeTagRecord> to_records(std::span<const PairEvent> events) {
  std::vector<TimeTagRecord> records;
  records.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    records.push_back({i, events[i].tau_meas, events[i].basis,
                       is_co_polarized(events[i].outcome)});
  }
  return records;
}

void write_timetags(std::ostream& out, std::span<const TimeTagRecord> records) {
  out << kTimeTagHeader << '\n';
  for (const TimeTagRecord& r : records) {
    out << r.pair_id << ',' << format_delay(r.tau_meas) << ',' << basis_letter(r.basis) << ','
        << (r.co_polarized ? "co" : "cross") << '\n';
  }
}

std::vector<TimeTagRecord> read_timetags(std::istream& in) {
  std::vector<TimeTagRecord> records;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError("line 1: empty time-tag file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTimeTagHeader) {
    fail(line_no, std::string("expected header '") + kTimeTagHeader + "'");
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 4) fail(line_no, "expected 4 fields, got " + std::to_string(fields.size()));

    TimeTagRecord r{};
    {
      const auto f = fields[0];
      const auto res = std::from_chars(f.data(), f.data() + f.size(), r.pair_id);
      if (res.ec != std::errc{} || res.ptr != f.data() + f.size()) fail(line_no, "bad pair_id");
    }
    {
      const auto f = fields[1];
      const auto res = std::from_chars(f.data(), f.data() + f.size(), r.tau_meas);
      if (res.ec != std::errc{} || res.ptr != f.data() + f.size() || !std::isfinite(r.tau_meas)) {
        fail(line_no, "bad tau_meas_ps");
      }
    }
    if (fields[2].size() != 1 || std::string_view("RDC").find(fields[2][0]) == std::string_view::npos) {
      fail(line_no, "basis must be R, D or C");
    }
    r.basis = basis_from_letter(fields[2][0]);
    if (fields[3] == "co") {
      r.co_polarized = true;
    } else if (fields[3] == "cross") {
      r.co_polarized = false;
    } else {
      fail(line_no, "outcome must be co or cross");
    }
    if (!records.empty() && r.pair_id <= records.back().pair_id) {
      fail(line_no, "pair_id must be strictly increasing");
    }
    records.push_back(r);
  }
  return records;
}

std::vector<TimeTagRecord> read_timetags_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open time-tag file " + path);
  return read_timetags(in);
}

CorrelationCounts tally(std::span<const TimeTagRecord> records, const GateSet& gates) {
  CorrelationCounts counts;
  for (const TimeTagRecord& r : records) {
    if (gates.contains(r.tau_meas)) counts.add(r.basis, r.co_polarized);
  }
  return counts;
}

AnalysisReport analyze_records(std::span<const TimeTagRecord> records, const GateWindow& gate) {
  AnalysisReport report;
  report.counts = tally(records, GateSet(gate));
  report.estimate = estimate(report.counts);
  return report;
}

AnalysisReport analyze_timetags(const std::string& path, const GateWindow& gate) {
  const auto records = read_timetags_file(path);
  return analyze_records(records, gate);
}

void write_report(std::ostream& out, const AnalysisReport& report) {
  out << "basis,n_co,n_cross,C,sigma\n";
  for (PolarizationBasis b : kAllBases) {
    const auto& c = report.counts[b];
    const auto& e = report.estimate[b];
    out << basis_letter(b) << ',' << c.n_co << ',' << c.n_cross << ',' << format_sig6(e.value)
        << ',' << format_sig6(e.sigma) << '\n';
  }
  out << "fidelity,,," << format_sig6(report.estimate.fidelity.value) << ','
      << format_sig6(report.estimate.fidelity.sigma) << '\n';
}

}  // namespace biphoton

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <tuple>

#include <fmt/format.h>

#include "iesim/engine.hpp"
#include "iesim/error.hpp"

namespace iesim {

namespace {

void flush(std::ostream& out, fmt::memory_buffer& buf, bool force) {
  if (force || buf.size() > (1u << 20)) {
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    buf.clear();
  }
}

double to_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ValidationError(fmt::format("trace csv line {}", line), std::string(s), "a decimal number");
  return v;
}

}  // namespace

void write_trace_csv(std::ostream& out, const Trace& trace) {
  struct Row {
    double start;
    std::size_t device;
    std::size_t index;
  };
  std::vector<Row> rows;
  for (std::size_t d = 0; d < trace.ledgers.size(); ++d)
    for (std::size_t i = 0; i < trace.ledgers[d].intervals.size(); ++i)
      rows.push_back({trace.ledgers[d].intervals[i].start, d, i});
  std::sort(rows.begin(), rows.end(),
            [](const Row& a, const Row& b) { return std::tie(a.start, a.device, a.index) < std::tie(b.start, b.device, b.index); });

  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "time_s,device,mode,duration_s\n");
  for (const auto& r : rows) {
    const auto& iv = trace.ledgers[r.device].intervals[r.index];
    fmt::format_to(std::back_inserter(buf), "{:.6f},{},{},{:.6f}\n", iv.start, trace.ledgers[r.device].device,
                   to_string(iv.mode), iv.duration);
    flush(out, buf, false);
  }
  flush(out, buf, true);
}

void write_powertrace_csv(std::ostream& out, const Trace& trace, const std::vector<PowertraceRecord>& records) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "time_s,device,cpu,lpm,tx,rx\n");
  for (const auto& r : records) {
    fmt::format_to(std::back_inserter(buf), "{:.6f},{},{},{},{},{}\n", r.time, trace.ledgers.at(r.device).device,
                   r.ticks[index(OperatingMode::CPU)], r.ticks[index(OperatingMode::LPM)],
                   r.ticks[index(OperatingMode::Tx)], r.ticks[index(OperatingMode::Rx)]);
    flush(out, buf, false);
  }
  flush(out, buf, true);
}

std::vector<EnergyLedger> read_trace_csv(std::istream& in, double horizon) {
  std::string line;
  if (!std::getline(in, line) || line != "time_s,device,mode,duration_s")
    throw ValidationError("trace csv header", line, "time_s,device,mode,duration_s");
  std::vector<EnergyLedger> out;
  std::map<std::string, std::size_t, std::less<>> index_of;
  double last_end = 0.0;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    std::string_view v(line);
    std::array<std::string_view, 4> f;
    for (std::size_t k = 0; k < 4; ++k) {
      const auto comma = v.find(',');
      if ((comma == std::string_view::npos) != (k == 3))
        throw ValidationError(fmt::format("trace csv line {}", n), line, "4 comma-separated fields");
      f[k] = v.substr(0, comma);
      v = comma == std::string_view::npos ? std::string_view{} : v.substr(comma + 1);
    }
    const auto mode = parse_mode(f[2]);
    if (!mode) throw ValidationError(fmt::format("trace csv line {}", n), std::string(f[2]), "LPM|CPU|Tx|Rx");
    auto [it, inserted] = index_of.try_emplace(std::string(f[1]), out.size());
    if (inserted) out.push_back(EnergyLedger{std::string(f[1]), {}, {}, {}});
    const ModeInterval iv{*mode, to_double(f[0], n), to_double(f[3], n)};
    last_end = std::max(last_end, iv.end());
    out[it->second].intervals.push_back(iv);
  }
  const double end = horizon > 0 ? horizon : last_end;
  for (auto& l : out) l.window = {0.0, end};
  return out;
}

}  // namespace iesim

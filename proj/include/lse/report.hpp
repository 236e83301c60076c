#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "lse/error.hpp"
#include "lse/evaluation.hpp"

namespace lse {

enum class ReportFormat { text, structured };

namespace detail {

inline std::string fixed3(double v) {
  if (std::isnan(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string exact(double v) {
  if (std::isnan(v)) return "na";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void text_row(std::ostringstream& os, std::string_view setting, std::string_view side, const RankSummary& s) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-9s %-5s %7s %7s %7s %7s %9s\n", std::string(setting).c_str(),
                std::string(side).c_str(), fixed3(s.mrr).c_str(), fixed3(s.hits1).c_str(), fixed3(s.hits3).c_str(),
                fixed3(s.hits10).c_str(), s.present() ? fixed3(s.mr).c_str() : "-");
  os << buf;
}

template <typename Fn>
void for_each_summary(Fn&& fn) {
  struct Entry {
    const char* setting;
    const char* side;
    SettingMetrics Metrics::*group;
    RankSummary SettingMetrics::*summary;
  };
  static constexpr Entry entries[] = {
      {"raw", "head", &Metrics::raw, &SettingMetrics::head},
      {"raw", "tail", &Metrics::raw, &SettingMetrics::tail},
      {"raw", "both", &Metrics::raw, &SettingMetrics::both},
      {"filtered", "head", &Metrics::filtered, &SettingMetrics::head},
      {"filtered", "tail", &Metrics::filtered, &SettingMetrics::tail},
      {"filtered", "both", &Metrics::filtered, &SettingMetrics::both},
  };
  for (const auto& e : entries) fn(e.setting, std::string_view(e.side), e.group, e.summary);
}

}  // namespace detail

// Table-style text with columns MRR Hits@1 Hits@3 Hits@10 MR.
inline std::string render_text(const Metrics& m) {
  std::ostringstream os;
  os << "link prediction: N=" << m.num_triples << " triples (" << 2 * m.num_triples
     << " queries), tie policy=" << to_string(m.tie) << '\n';
  if (m.num_triples == 0) {
    os << "no evaluation triples; metrics absent\n";
    return os.str();
  }
  char header[160];
  std::snprintf(header, sizeof header, "%-9s %-5s %7s %7s %7s %7s %9s\n", "setting", "side", "MRR", "Hits@1", "Hits@3",
                "Hits@10", "MR");
  os << header;
  detail::for_each_summary([&](const char* setting, std::string_view side, auto group, auto summary) {
    detail::text_row(os, setting, side, (m.*group).*summary);
  });
  return os.str();
}

// key=value lines. Averaged-over-both-sides metrics use the short keys
// (`filtered.mrr`), per-side ones insert the side (`raw.head.hits10`).
inline std::string render_structured(const Metrics& m) {
  std::ostringstream os;
  os << "n=" << m.num_triples << '\n';
  os << "tie_policy=" << to_string(m.tie) << '\n';
  detail::for_each_summary([&](const char* setting, std::string_view side, auto group, auto summary) {
    const RankSummary& s = (m.*group).*summary;
    const std::string prefix = std::string(setting) + (side == "both" ? "" : "." + std::string(side)) + ".";
    os << prefix << "count=" << s.count << '\n';
    os << prefix << "mrr=" << detail::exact(s.mrr) << '\n';
    os << prefix << "mr=" << detail::exact(s.mr) << '\n';
    os << prefix << "hits1=" << detail::exact(s.hits1) << '\n';
    os << prefix << "hits3=" << detail::exact(s.hits3) << '\n';
    os << prefix << "hits10=" << detail::exact(s.hits10) << '\n';
  });
  return os.str();
}

inline std::string render(const Metrics& m, ReportFormat format) {
  return format == ReportFormat::text ? render_text(m) : render_structured(m);
}

inline Metrics parse_structured(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("report line " + std::to_string(line_no) + ": expected key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError("report: missing key '" + key + "'");
    return it->second;
  };
  auto number = [&](const std::string& key) {
    const auto& v = get(key);
    if (v == "na") return std::numeric_limits<double>::quiet_NaN();
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw ParseError("report: bad number for '" + key + "'");
      return d;
    } catch (const std::logic_error&) {
      throw ParseError("report: bad number for '" + key + "'");
    }
  };
  auto count = [&](const std::string& key) -> std::size_t {
    try {
      return static_cast<std::size_t>(std::stoull(get(key)));
    } catch (const std::logic_error&) {
      throw ParseError("report: bad count for '" + key + "'");
    }
  };

  Metrics m;
  m.num_triples = count("n");
  try {
    m.tie = parse_tie_policy(get("tie_policy"));
  } catch (const ConfigError& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  detail::for_each_summary([&](const char* setting, std::string_view side, auto group, auto summary) {
    RankSummary& s = (m.*group).*summary;
    const std::string prefix = std::string(setting) + (side == "both" ? "" : "." + std::string(side)) + ".";
    s.count = count(prefix + "count");
    s.mrr = number(prefix + "mrr");
    s.mr = number(prefix + "mr");
    s.hits1 = number(prefix + "hits1");
    s.hits3 = number(prefix + "hits3");
    s.hits10 = number(prefix + "hits10");
  });
  return m;
}

}  // namespace lse

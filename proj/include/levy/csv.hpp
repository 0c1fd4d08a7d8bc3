#pragma once

// CSV ingestion for tick, daily-closure and return files, and a shortest
// round-trip number formatter for the writers.
//
//   timestamp,value   ticks; timestamp is epoch seconds or ISO-8601
//   value             ticks without times
//   date,close        daily closures
//   return            returns at level 1

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "levy/error.hpp"
#include "levy/returns.hpp"

namespace levy::csv {

enum class BadRowPolicy { fail, skip };

enum class InputKind { ticks, daily, returns };

[[nodiscard]] inline std::string_view kind_name(InputKind k) {
  switch (k) {
    case InputKind::ticks: return "ticks";
    case InputKind::daily: return "daily";
    case InputKind::returns: return "returns";
  }
  return "?";
}

[[nodiscard]] inline BadRowPolicy parse_policy(std::string_view s) {
  if (s == "fail") return BadRowPolicy::fail;
  if (s == "skip") return BadRowPolicy::skip;
  throw InvalidParameter("bad-row policy must be 'fail' or 'skip', got '" + std::string(s) + "'");
}

struct Input {
  InputKind kind = InputKind::ticks;
  TickSeries ticks;      // ticks and daily
  ReturnSeries returns;  // returns
  std::size_t rows = 0;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

inline bool take_int(std::string_view& s, std::size_t digits, int& out) {
  if (s.size() < digits) return false;
  int v = 0;
  for (std::size_t i = 0; i < digits; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  s.remove_prefix(digits);
  return true;
}

inline bool take_char(std::string_view& s, char c) {
  if (s.empty() || s.front() != c) return false;
  s.remove_prefix(1);
  return true;
}

// YYYY-MM-DD[(T| )HH:MM[:SS[.fff]]][Z|(+|-)HH[:]MM], as seconds since the epoch.
inline std::optional<double> parse_iso8601(std::string_view s) {
  using namespace std::chrono;
  int y = 0, mo = 0, d = 0;
  if (!take_int(s, 4, y) || !take_char(s, '-') || !take_int(s, 2, mo) || !take_char(s, '-') ||
      !take_int(s, 2, d)) {
    return std::nullopt;
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  double secs = static_cast<double>(sys_days{ymd}.time_since_epoch().count()) * 86400.0;
  if (s.empty()) return secs;
  if (!take_char(s, 'T') && !take_char(s, ' ')) return std::nullopt;
  int h = 0, mi = 0, se = 0;
  if (!take_int(s, 2, h) || !take_char(s, ':') || !take_int(s, 2, mi)) return std::nullopt;
  if (take_char(s, ':')) {
    if (!take_int(s, 2, se)) return std::nullopt;
  }
  if (h > 23 || mi > 59 || se > 60) return std::nullopt;
  double frac = 0.0;
  if (!s.empty() && s.front() == '.') {
    std::size_t n = 1;
    while (n < s.size() && std::isdigit(static_cast<unsigned char>(s[n]))) ++n;
    if (n == 1) return std::nullopt;
    const auto f = parse_number(std::string("0") + std::string(s.substr(0, n)));
    if (!f) return std::nullopt;
    frac = *f;
    s.remove_prefix(n);
  }
  secs += h * 3600.0 + mi * 60.0 + se + frac;
  if (s.empty() || take_char(s, 'Z')) return s.empty() ? std::optional<double>(secs) : std::nullopt;
  const char sign = s.front();
  if (sign != '+' && sign != '-') return std::nullopt;
  s.remove_prefix(1);
  int oh = 0, om = 0;
  if (!take_int(s, 2, oh)) return std::nullopt;
  take_char(s, ':');
  if (!take_int(s, 2, om) || !s.empty()) return std::nullopt;
  const double offset = oh * 3600.0 + om * 60.0;
  return sign == '+' ? secs - offset : secs + offset;
}

/// Epoch seconds or ISO-8601, decided per field.
inline std::optional<double> parse_timestamp(std::string_view s) {
  if (auto v = parse_number(s)) return v;
  return parse_iso8601(s);
}

}  // namespace detail

/// Shortest text that reads back to the same double.
[[nodiscard]] inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error("format_double: conversion failed");
  return {buf, ptr};
}

[[nodiscard]] inline Input read(std::istream& in, BadRowPolicy policy = BadRowPolicy::fail) {
  Input result;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    for (auto f : detail::split(t)) header.push_back(detail::lower(f));
  }
  if (header.empty()) throw ParseError("empty input: no header row", line_no);

  bool with_times = false;
  if (header == std::vector<std::string>{"timestamp", "value"}) {
    result.kind = InputKind::ticks;
    with_times = true;
  } else if (header == std::vector<std::string>{"value"}) {
    result.kind = InputKind::ticks;
  } else if (header == std::vector<std::string>{"date", "close"}) {
    result.kind = InputKind::daily;
    with_times = true;
  } else if (header == std::vector<std::string>{"return"}) {
    result.kind = InputKind::returns;
  } else {
    throw ParseError("unrecognized header; expected 'timestamp,value', 'value', 'date,close' or 'return'",
                     line_no);
  }
  const std::size_t width = header.size();

  auto reject = [&](const std::string& why) {
    if (policy == BadRowPolicy::fail) throw ParseError(why, line_no);
    ++result.skipped;
    result.warnings.push_back("line " + std::to_string(line_no) + ": " + why + " (skipped)");
  };

  while (std::getline(in, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    const auto fields = detail::split(t);
    if (fields.size() != width) {
      reject("expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()));
      continue;
    }
    const auto value = detail::parse_number(fields.back());
    if (!value) {
      reject("cannot parse number '" + std::string(fields.back()) + "'");
      continue;
    }
    if (result.kind == InputKind::returns) {
      result.returns.returns.push_back(*value);
      ++result.rows;
      continue;
    }
    if (!(*value > 0.0)) {
      reject("index value must be positive, got " + std::string(fields.back()));
      continue;
    }
    if (with_times) {
      const auto ts = detail::parse_timestamp(fields.front());
      if (!ts) {
        reject("cannot parse timestamp '" + std::string(fields.front()) + "'");
        continue;
      }
      if (!result.ticks.timestamps.empty() && *ts < result.ticks.timestamps.back()) {
        reject("timestamp goes backwards");
        continue;
      }
      result.ticks.timestamps.push_back(*ts);
    }
    result.ticks.values.push_back(*value);
    ++result.rows;
  }
  if (result.rows == 0) throw ParseError("no data rows", line_no);
  return result;
}

[[nodiscard]] inline Input read_file(const std::string& path,
                                     BadRowPolicy policy = BadRowPolicy::fail) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open input file '" + path + "'");
  return read(in, policy);
}

/// Level-1 returns from any supported input: ticks are deduplicated first.
[[nodiscard]] inline ReturnSeries to_returns(const Input& input) {
  switch (input.kind) {
    case InputKind::returns: return input.returns;
    case InputKind::ticks: return log_returns(dedup_ticks(input.ticks));
    case InputKind::daily: return log_returns(input.ticks);
  }
  throw Error("unknown input kind");
}

}  // namespace levy::csv

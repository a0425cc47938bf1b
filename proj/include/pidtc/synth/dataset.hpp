#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pidtc/data.hpp"
#include "pidtc/errors.hpp"
#include "pidtc/synth/trajectory.hpp"
#include "pidtc/textio.hpp"

namespace pidtc::synth {

inline constexpr const char* kDatasetMagic = "PIDTC-DATA v1";

namespace detail {

template <typename Fn>
auto as_data_error(std::size_t line_no, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    throw DataError("dataset line " + std::to_string(line_no) + ": " + e.what());
  }
}

inline std::vector<std::string> require_fields(const std::string& line, std::size_t line_no,
                                               const std::string& tag, std::size_t count) {
  const std::vector<std::string> fields = split_ws(line);
  if (fields.size() != count + 1 || fields[0] != tag) {
    throw DataError("dataset line " + std::to_string(line_no) + ": expected `" + tag + "` with " +
                    std::to_string(count) + " values, got `" + line + "`");
  }
  return fields;
}

}  // namespace detail

inline std::string serialize_dataset(const std::vector<DatasetRecord>& records) {
  std::string out = std::string(kDatasetMagic) + " count=" + std::to_string(records.size()) + "\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const TrajectorySample& s = records[i].sample;
    if (!s.priors) throw DataError("dataset record " + std::to_string(i) + " has no prior points");
    if (!s.label) throw DataError("dataset record " + std::to_string(i) + " has no label");
    out += "TRAJ\n";
    for (int j = 0; j < kTrajectoryLength; ++j) {
      const Point2& p = s.points[static_cast<std::size_t>(j)];
      out += std::to_string(j) + " " + format_double(p.x) + " " + format_double(p.y) + "\n";
    }
    out += "LAND " + format_double(s.landing.x) + " " + format_double(s.landing.y) + "\n";
    out += "PRIOR " + format_double(s.priors->p1.x) + " " + format_double(s.priors->p1.y) + " " +
           format_double(s.priors->p2.x) + " " + format_double(s.priors->p2.y) + "\n";
    out += "LABEL " + std::to_string(*s.label) + "\n";
    out += "SEED " + std::to_string(records[i].seed) + "\n";
    out += "\n";
  }
  return out;
}

inline std::vector<DatasetRecord> parse_dataset(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }

  if (lines.empty()) throw DataError("dataset line 1: empty file");
  const std::string prefix = std::string(kDatasetMagic) + " count=";
  if (lines[0].rfind(prefix, 0) != 0) {
    throw DataError("dataset line 1: expected `" + prefix + "N`, got `" + lines[0] + "`");
  }
  const std::uint64_t count =
      detail::as_data_error(1, [&] { return parse_u64(lines[0].substr(prefix.size()), 1); });

  std::vector<DatasetRecord> records;
  records.reserve(count);
  std::size_t idx = 1;  // zero-based index into lines; reported numbers are 1-based
  auto next_line = [&](const char* what) -> const std::string& {
    if (idx >= lines.size()) {
      throw DataError("dataset line " + std::to_string(lines.size() + 1) +
                      ": unexpected end of file, expected " + std::string(what));
    }
    return lines[idx++];
  };

  for (std::uint64_t r = 0; r < count; ++r) {
    DatasetRecord rec;
    {
      const std::string& line = next_line("TRAJ");
      if (line != "TRAJ") {
        throw DataError("dataset line " + std::to_string(idx) + ": expected `TRAJ`, got `" + line +
                        "`");
      }
    }
    for (int j = 0; j < kTrajectoryLength; ++j) {
      const std::string& line = next_line("trajectory point");
      const std::size_t line_no = idx;
      const std::vector<std::string> f = split_ws(line);
      if (f.size() != 3) {
        throw DataError("dataset line " + std::to_string(line_no) +
                        ": expected `f x y`, got `" + line + "`");
      }
      const std::uint64_t frame =
          detail::as_data_error(line_no, [&] { return parse_u64(f[0], line_no); });
      if (frame != static_cast<std::uint64_t>(j)) {
        throw DataError("dataset line " + std::to_string(line_no) + ": expected frame index " +
                        std::to_string(j) + ", got " + f[0]);
      }
      rec.sample.points[static_cast<std::size_t>(j)] = detail::as_data_error(line_no, [&] {
        return Point2{parse_double(f[1], line_no), parse_double(f[2], line_no)};
      });
    }
    {
      const std::string& line = next_line("LAND");
      const std::size_t line_no = idx;
      const std::vector<std::string> f = detail::require_fields(line, line_no, "LAND", 2);
      rec.sample.landing = detail::as_data_error(line_no, [&] {
        return Point2{parse_double(f[1], line_no), parse_double(f[2], line_no)};
      });
    }
    {
      const std::string& line = next_line("PRIOR");
      const std::size_t line_no = idx;
      const std::vector<std::string> f = detail::require_fields(line, line_no, "PRIOR", 4);
      rec.sample.priors = detail::as_data_error(line_no, [&] {
        return vision::PriorPoints{Point2{parse_double(f[1], line_no), parse_double(f[2], line_no)},
                                   Point2{parse_double(f[3], line_no), parse_double(f[4], line_no)}};
      });
    }
    {
      const std::string& line = next_line("LABEL");
      const std::size_t line_no = idx;
      const std::vector<std::string> f = detail::require_fields(line, line_no, "LABEL", 1);
      if (f[1] != "0" && f[1] != "1") {
        throw DataError("dataset line " + std::to_string(line_no) + ": label must be 0 or 1, got `" +
                        f[1] + "`");
      }
      rec.sample.label = f[1] == "1" ? 1 : 0;
    }
    {
      const std::string& line = next_line("SEED");
      const std::size_t line_no = idx;
      const std::vector<std::string> f = detail::require_fields(line, line_no, "SEED", 1);
      rec.seed = detail::as_data_error(line_no, [&] { return parse_u64(f[1], line_no); });
    }
    {
      const std::string& line = next_line("blank record separator");
      if (!line.empty()) {
        throw DataError("dataset line " + std::to_string(idx) + ": expected blank line, got `" +
                        line + "`");
      }
    }
    records.push_back(rec);
  }
  if (idx != lines.size()) {
    throw DataError("dataset line " + std::to_string(idx + 1) + ": trailing content after " +
                    std::to_string(count) + " records");
  }
  return records;
}

inline void write_dataset(const std::string& path, const std::vector<DatasetRecord>& records) {
  write_text_file(path, serialize_dataset(records));
}

inline std::vector<DatasetRecord> read_dataset(const std::string& path) {
  return parse_dataset(read_text_file(path));
}

}  // namespace pidtc::synth

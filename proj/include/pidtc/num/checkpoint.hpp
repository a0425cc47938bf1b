#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pidtc/num/tensor.hpp"
#include "pidtc/textio.hpp"

namespace pidtc::num {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

inline constexpr const char* kCheckpointMagic = "PIDTC-CKPT v1";

// Plain-text archive: magic line, then per tensor a header line
// "<name> <ndims> <d1> ..." and one line of values, closed by "END".
// Values use the shortest round-trip decimal form, so save/load is bit-exact.
inline std::string serialize_checkpoint(const std::vector<NamedTensor>& tensors) {
  std::string out = kCheckpointMagic;
  out += "\n";
  for (const auto& [name, tensor] : tensors) {
    if (name.empty() || name.find_first_of(" \t\n\r") != std::string::npos) {
      throw CheckpointError("checkpoint: invalid tensor name '" + name + "'");
    }
    out += name;
    out += " " + std::to_string(tensor.rank());
    for (std::size_t d : tensor.shape()) out += " " + std::to_string(d);
    out += "\n";
    const auto& v = tensor.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += " ";
      out += format_double(v[i]);
    }
    out += "\n";
  }
  out += "END\n";
  return out;
}

inline void save_checkpoint(const std::filesystem::path& path,
                            const std::vector<NamedTensor>& tensors) {
  write_text_file(path, serialize_checkpoint(tensors));
}

namespace detail {

// Number parsing shares textio helpers but reports as checkpoint corruption.
template <typename F>
auto as_checkpoint_error(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw CheckpointError(std::string("checkpoint ") + e.what());
  }
}

}  // namespace detail

inline std::vector<NamedTensor> parse_checkpoint(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();

  auto fail = [](std::size_t line_no, const std::string& what) -> void {
    throw CheckpointError("checkpoint line " + std::to_string(line_no) + ": " + what);
  };

  if (lines.empty() || lines[0] != kCheckpointMagic) {
    throw CheckpointError("checkpoint line 1: expected '" + std::string(kCheckpointMagic) + "'");
  }

  std::vector<NamedTensor> out;
  std::size_t i = 1;
  for (;;) {
    if (i >= lines.size()) fail(lines.size(), "missing END marker");
    if (lines[i] == "END") {
      if (i + 1 != lines.size()) fail(i + 2, "content after END");
      break;
    }
    const auto header = split_ws(lines[i]);
    if (header.size() < 2) fail(i + 1, "expected '<name> <ndims> <dims...>'");
    const std::string& name = header[0];
    const auto ndims = static_cast<std::size_t>(
        detail::as_checkpoint_error([&] { return parse_u64(header[1], i + 1); }));
    if (header.size() != 2 + ndims) fail(i + 1, "dimension count does not match ndims");
    Shape shape(ndims);
    for (std::size_t d = 0; d < ndims; ++d) {
      shape[d] = static_cast<std::size_t>(
          detail::as_checkpoint_error([&] { return parse_u64(header[2 + d], i + 1); }));
    }
    ++i;
    if (i >= lines.size()) fail(i, "missing value line for tensor '" + name + "'");
    const auto fields = split_ws(lines[i]);
    if (fields.size() != shape_size(shape)) {
      fail(i + 1, "tensor '" + name + "' expects " + std::to_string(shape_size(shape)) +
                      " values, got " + std::to_string(fields.size()));
    }
    std::vector<double> values(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k) {
      values[k] = detail::as_checkpoint_error([&] { return parse_double(fields[k], i + 1); });
    }
    out.push_back({name, Tensor::param(std::move(shape), std::move(values))});
    ++i;
  }
  return out;
}

inline std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(read_text_file(path));
}

}  // namespace pidtc::num

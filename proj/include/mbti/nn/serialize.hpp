#ifndef MBTI_NN_SERIALIZE_HPP_
#define MBTI_NN_SERIALIZE_HPP_
#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <string>

#include "mbti/core.hpp"
#include "mbti/nn/tensor.hpp"
#include "mbti/util.hpp"

// Weights blob: "MBTW" magic, u32 version, u32 tensor count, then per tensor
// u32 name length, name bytes, u32 rows, u32 cols and rows*cols float32 values
// in row-major order. All integers little-endian.
namespace mbti::nn {

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
  if (pos + 4 > in.size()) throw Error("truncated weights file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += 4;
  return v;
}

}  // namespace detail

using TensorMap = std::map<std::string, Matrix<float>>;

template <typename Weights>
void save_weights(const Weights& weights, const std::filesystem::path& path) {
  std::string out = "MBTW";
  detail::put_u32(out, 1);
  std::uint32_t count = 0;
  weights.visit([&count](const std::string&, const auto&) { ++count; });
  detail::put_u32(out, count);
  weights.visit([&out](const std::string& name, const auto& m) {
    detail::put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    detail::put_u32(out, static_cast<std::uint32_t>(m.rows()));
    detail::put_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (Index i = 0; i < m.size(); ++i) {
      const float f = static_cast<float>(m.data()[i]);
      std::uint32_t bits = 0;
      std::memcpy(&bits, &f, sizeof bits);
      detail::put_u32(out, bits);
    }
  });
  write_file(path, out);
}

inline TensorMap read_tensors(const std::filesystem::path& path) {
  const std::string in = read_file(path);
  if (in.size() < 12 || in.compare(0, 4, "MBTW") != 0) throw Error(path.string() + ": not a weights file");
  std::size_t pos = 4;
  if (detail::get_u32(in, pos) != 1) throw Error(path.string() + ": unsupported weights version");
  const std::uint32_t count = detail::get_u32(in, pos);
  TensorMap tensors;
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::uint32_t len = detail::get_u32(in, pos);
    if (pos + len > in.size()) throw Error("truncated weights file");
    std::string name = in.substr(pos, len);
    pos += len;
    const std::uint32_t rows = detail::get_u32(in, pos);
    const std::uint32_t cols = detail::get_u32(in, pos);
    Matrix<float> m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) {
      const std::uint32_t bits = detail::get_u32(in, pos);
      std::memcpy(m.data() + i, &bits, sizeof bits);
    }
    tensors.emplace(std::move(name), std::move(m));
  }
  return tensors;
}

/// Copies tensors into `weights` by name. Every parameter whose name starts
/// with `required_prefix` must be present; tensors the model does not have are
/// ignored. Any shape disagreement throws ValidationError.
template <typename Weights>
void assign_weights(Weights& weights, const TensorMap& tensors, const std::string& required_prefix) {
  weights.visit([&](const std::string& name, auto& m) {
    const auto it = tensors.find(name);
    if (it == tensors.end()) {
      if (name.starts_with(required_prefix)) throw ValidationError("weights file lacks tensor " + name);
      return;
    }
    if (it->second.rows() != m.rows() || it->second.cols() != m.cols()) {
      throw ValidationError("shape mismatch for " + name + ": file has " +
                            std::to_string(it->second.rows()) + "x" + std::to_string(it->second.cols()) +
                            ", model expects " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()));
    }
    using Scalar = typename std::remove_reference_t<decltype(m)>::Scalar;
    m = it->second.template cast<Scalar>();
  });
}

}  // namespace mbti::nn

#endif  // MBTI_NN_SERIALIZE_HPP_

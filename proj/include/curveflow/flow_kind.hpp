#pragma once

#include <optional>
#include <string_view>

namespace curveflow {

/// AP: g = 0. LP: g = I0 / R. JP: g = L^2 / 2A - R.
enum class FlowKind { AP, LP, JP };

constexpr std::string_view to_string(FlowKind kind) {
  switch (kind) {
    case FlowKind::AP: return "AP";
    case FlowKind::LP: return "LP";
    case FlowKind::JP: return "JP";
  }
  return "?";
}

constexpr std::optional<FlowKind> parse_flow_kind(std::string_view s) {
  if (s == "AP" || s == "ap") return FlowKind::AP;
  if (s == "LP" || s == "lp") return FlowKind::LP;
  if (s == "JP" || s == "jp") return FlowKind::JP;
  return std::nullopt;
}

template <typename Scalar>
struct Diagnostics;

/// Scale-invariant forcing g of the flow. Throws NonPositiveArea for JP
/// when A <= 0.
template <typename Scalar>
Scalar nonlocal_forcing(const Diagnostics<Scalar>& d, FlowKind flow);

}  // namespace curveflow

#pragma once

namespace netflow {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace netflow

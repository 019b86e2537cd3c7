#pragma once

namespace rabistark {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rabistark

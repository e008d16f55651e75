#pragma once

namespace fsqkd {

inline constexpr const char* kVersion = "0.1.0";

} // namespace fsqkd

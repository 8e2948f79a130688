#pragma once

namespace gselab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gselab

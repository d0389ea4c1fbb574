#pragma once

namespace feekit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace feekit

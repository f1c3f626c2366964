#pragma once

namespace tokvar {

inline constexpr const char* kToolkitVersion = "0.1.0";

}  // namespace tokvar

#pragma once

namespace mtfcnn {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace mtfcnn

#pragma once

namespace benchstat {

inline constexpr const char* kEngineVersion = "0.1.0";
inline constexpr int kCacheSchemaVersion = 1;
inline constexpr int kTensorSchemaVersion = 1;

}  // namespace benchstat

#pragma once

namespace carma_hf {

inline constexpr const char* version = "0.1.0";

}  // namespace carma_hf

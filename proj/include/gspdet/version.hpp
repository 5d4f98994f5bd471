#pragma once

namespace gspdet {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gspdet

#pragma once

namespace vlexp {

inline constexpr const char* version = "0.1.0";

}

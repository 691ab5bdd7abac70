#pragma once

namespace chiral {

inline constexpr const char *version = "0.1.0";

} // namespace chiral

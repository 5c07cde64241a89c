#pragma once

namespace dsom {

inline constexpr const char* version_string = "dsom 1.0.0";

} // namespace dsom

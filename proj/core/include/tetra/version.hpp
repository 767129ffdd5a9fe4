#pragma once

namespace tetra {

inline constexpr const char* kVersion = "0.1.0";

}

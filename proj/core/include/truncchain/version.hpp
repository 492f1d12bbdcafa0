#pragma once

#include <string_view>

namespace truncchain {

/// Library version, e.g. "0.1.0".
std::string_view version() noexcept;

}  // namespace truncchain

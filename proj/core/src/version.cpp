#include "truncchain/version.hpp"

namespace truncchain {

std::string_view version() noexcept { return TRUNCCHAIN_VERSION; }

}  // namespace truncchain

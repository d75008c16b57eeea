#include "xva/error.hpp"

#include <utility>

namespace xva {

Error::Error(std::string module, const std::string& message)
    : std::runtime_error(module + ": " + message), module_(std::move(module)) {}

} // namespace xva

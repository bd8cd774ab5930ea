// Common exception base for the perfagent harness.
#pragma once

#include <stdexcept>
#include <string>

namespace perfagent {

/// Root of every error thrown by the harness. Module-specific errors derive
/// from this so callers can catch them selectively or all at once.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace perfagent

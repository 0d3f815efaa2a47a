#pragma once

#include <stdexcept>
#include <string>

namespace mcastsim {

struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SchedulingInPast : SimError {
    using SimError::SimError;
};

struct IfaceDown : SimError {
    using SimError::SimError;
};

struct NotMulticast : SimError {
    using SimError::SimError;
};

struct NotMember : SimError {
    using SimError::SimError;
};

struct UnreachableNextHop : SimError {
    using SimError::SimError;
};

struct RpUnreachable : SimError {
    using SimError::SimError;
};

struct NoRpForGroup : SimError {
    using SimError::SimError;
};

} // namespace mcastsim

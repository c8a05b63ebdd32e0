#pragma once

#include <stdexcept>
#include <string>

namespace cascade {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Case ingestion / validation
struct MalformedCase : Error {
    using Error::Error;
};
struct InvalidDroop : Error {
    using Error::Error;
};
struct InvalidInertia : Error {
    using Error::Error;
};

// Topology / linear algebra
struct SingularTopology : Error {
    using Error::Error;
};

// Dispatch / dynamics
struct NoGeneration : Error {
    using Error::Error;
};
struct SolverFailure : Error {
    using Error::Error;
};
struct InitFailure : Error {
    using Error::Error;
};
struct NumericalDivergence : Error {
    using Error::Error;
};

// Metrics
struct EmptySet : Error {
    using Error::Error;
};
struct BadAlpha : Error {
    using Error::Error;
};

// Study orchestration
struct ScenarioMismatch : Error {
    using Error::Error;
};
struct EmptyStudy : Error {
    using Error::Error;
};

} // namespace cascade

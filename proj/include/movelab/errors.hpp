#pragma once

#include <stdexcept>
#include <string>

namespace movelab {

// Base for every error the toolkit raises. The CLI reports these on stderr
// with an "error:" prefix and a nonzero exit code.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CollinearReference : Error {
    using Error::Error;
};
struct DegenerateAngle : Error {
    using Error::Error;
};
struct TooShort : Error {
    using Error::Error;
};
struct ZeroSignal : Error {
    using Error::Error;
};
struct DegenerateSegment : Error {
    using Error::Error;
};
struct DegenerateMove : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct DimensionMismatch : Error {
    using Error::Error;
};
struct EmptyData : Error {
    using Error::Error;
};
struct SingleClass : Error {
    using Error::Error;
};
struct EmptyTrainingSet : Error {
    using Error::Error;
};
struct TooFewSamples : Error {
    using Error::Error;
};
struct LengthMismatch : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct InvalidConfig : Error {
    using Error::Error;
};
struct MissingDataset : Error {
    using Error::Error;
};

} // namespace movelab

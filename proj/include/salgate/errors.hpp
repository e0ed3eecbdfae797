#pragma once

#include <stdexcept>

namespace salgate {

// Base for all data-level failures raised by the library. Message text
// identifies the offending record, line, or value.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoFailure : Error { using Error::Error; };
struct MalformedManifest : Error { using Error::Error; };
struct MissingAsset : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct MalformedImage : Error { using Error::Error; };
struct EmptySaliency : Error { using Error::Error; };
struct BoxOutOfBounds : Error { using Error::Error; };
struct MalformedEmbeddings : Error { using Error::Error; };
struct TooFewPoints : Error { using Error::Error; };
struct DegenerateLabeling : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct EmptyModel : Error { using Error::Error; };
struct MalformedModel : Error { using Error::Error; };
struct MalformedReport : Error { using Error::Error; };
struct InvalidConfig : Error { using Error::Error; };

} // namespace salgate

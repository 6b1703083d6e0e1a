#pragma once

#include <stdexcept>
#include <string>

namespace sega {

/// Base class for every error raised by the evaluation stack.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SEGA_DEFINE_ERROR(Name)            \
    class Name : public Error {            \
    public:                                \
        using Error::Error;                \
    }

SEGA_DEFINE_ERROR(UnsupportedFormat);
SEGA_DEFINE_ERROR(CorruptFile);
SEGA_DEFINE_ERROR(InvalidGeometry);
SEGA_DEFINE_ERROR(IoError);
SEGA_DEFINE_ERROR(GeometryMismatch);
SEGA_DEFINE_ERROR(EmptyMask);
SEGA_DEFINE_ERROR(DomainError);
SEGA_DEFINE_ERROR(IncompleteRecord);
SEGA_DEFINE_ERROR(IncompleteDesign);
SEGA_DEFINE_ERROR(EmptyField);

#undef SEGA_DEFINE_ERROR

}  // namespace sega

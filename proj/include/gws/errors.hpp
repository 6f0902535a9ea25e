#pragma once

#include <stdexcept>
#include <string>

namespace gws {

// Malformed text input (tree strings, distribution specs). The message
// carries the byte offset where parsing gave up.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// A distribution violates the standing conditions (normalization,
// criticality, mass at zero) where a caller requires them to hold.
class InvalidDistribution : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A conditioned size n with zero probability under the offspring law,
// e.g. n in the wrong residue class of the span.
class InfeasibleSize : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An exhaustive-enumeration guard was exceeded (brute-force counting,
// tree enumeration, certificate search bounds).
class OracleTooLarge : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A truncated series or convolution failed its documented tolerance, or a
// cross-check between two computations of the same quantity disagreed.
class PrecisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An exact integer count exceeded the 64-bit range; callers can retry
// through the wide-integer entry points.
class CountOverflow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A sample with zero variance where a standardization scale is needed.
class DegenerateSample : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A centered-toll evaluation hit a fringe size missing from the supplied
// mean table.
class IncompleteTable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gws

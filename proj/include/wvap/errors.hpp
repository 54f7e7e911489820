#pragma once

#include <stdexcept>
#include <string>

namespace wvap {

// Base class for everything this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidSize : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct DimensionTooLarge : Error { using Error::Error; };
struct NotHermitian : Error { using Error::Error; };
struct NotUnitary : Error { using Error::Error; };

// Pre- and postselection pair with (numerically) zero overlap.
struct OrthogonalSelection : Error { using Error::Error; };
// Conditional-unitary blocks whose projectors do not resolve the identity.
struct IncompleteProjectors : Error { using Error::Error; };
// Postselection outcome with (numerically) zero probability.
struct ImpossibleOutcome : Error { using Error::Error; };
// Reflection index with odd popcount; the ancilla unitary would lose
// hermiticity and the postselection identities break.
struct OddParityW : Error { using Error::Error; };

} // namespace wvap

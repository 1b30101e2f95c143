#pragma once

#include <stdexcept>
#include <string>

namespace duality_lab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// State description is inconsistent (bad weights, negative means, bad matrix shape).
class MalformedSpec : public Error {
public:
    using Error::Error;
};

/// An explicit cutoff cannot hold the requested Fock/NOON content.
class CutoffTooSmall : public Error {
public:
    using Error::Error;
};

class OrderOutOfRange : public Error {
public:
    using Error::Error;
};

/// The kth-order normalization vanishes, so D_k and V_k do not exist.
class UndefinedOrder : public Error {
public:
    using Error::Error;
};

class CutoffMismatch : public Error {
public:
    using Error::Error;
};

class EmptyLog : public Error {
public:
    using Error::Error;
};

/// File or text could not be parsed into the expected format.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace duality_lab

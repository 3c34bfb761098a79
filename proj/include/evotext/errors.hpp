#ifndef EVOTEXT_ERRORS_HPP
#define EVOTEXT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace evotext {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// File / wire parsing problems; message carries line or row numbers.
class ParseError : public Error {
public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
public:
  using Error::Error;
};

class ZeroVectorError : public Error {
public:
  using Error::Error;
};

class EmptyInputError : public Error {
public:
  using Error::Error;
};

class LengthMismatchError : public Error {
public:
  using Error::Error;
};

class TooShortError : public Error {
public:
  using Error::Error;
};

class NoMappableCharError : public Error {
public:
  using Error::Error;
};

// Remote plugin could not be reached or kept failing after retries.
class TransportError : public Error {
public:
  using Error::Error;
};

// Remote plugin answered, but the payload does not follow the protocol.
class MalformedResponseError : public Error {
public:
  using Error::Error;
};

// A response parsed fine but violates a stated invariant (e.g. probs
// that do not sum to 1).
class InvariantViolationError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class TrainingError : public Error {
public:
  using Error::Error;
};

class NoAttackableWordsError : public Error {
public:
  using Error::Error;
};

class DomainError : public Error {
public:
  using Error::Error;
};

class NoSuccessError : public Error {
public:
  using Error::Error;
};

} // namespace evotext

#endif

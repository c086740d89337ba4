#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jbound {

// Base class for every error this library raises on purpose.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Argument outside the function's domain interval.
class DomainError : public Error {
public:
  using Error::Error;
};

// The spec lacks the data a class check needs (e.g. nonnegative domain
// for a superquadratic check).
class UnsupportedClassError : public Error {
public:
  using Error::Error;
};

// Weight tuple failed its mode's validation; `index` is the first
// offending position (0-based).
class InvalidWeightsError : public Error {
public:
  InvalidWeightsError(const std::string& what, std::size_t index)
      : Error(what), index(index) {}
  std::size_t index;
};

class LengthMismatchError : public Error {
public:
  using Error::Error;
};

class ZeroDenominatorError : public Error {
public:
  using Error::Error;
};

// An interior prefix sum of the rearranged q hit 0 or 1 exactly.
class DegenerateQError : public Error {
public:
  using Error::Error;
};

// A theorem hypothesis failed; the message names which one.
class HypothesisViolatedError : public Error {
public:
  using Error::Error;
};

class UnsortedInputError : public Error {
public:
  using Error::Error;
};

class NoInsertionPointError : public Error {
public:
  using Error::Error;
};

class BadLambdaError : public Error {
public:
  using Error::Error;
};

// Input file / JSON schema problem; message names the field (and line
// for syntax errors).
class ParseError : public Error {
public:
  using Error::Error;
};

} // namespace jbound

#pragma once

#include <stdexcept>
#include <string>

namespace qttlab {

// Base of every domain failure. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class LengthError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

// Two tag streams show no significant cross-correlation peak.
class NoCorrelation : public Error {
public:
    using Error::Error;
};

class NoPeak : public Error {
public:
    using Error::Error;
};

class InvalidRun : public Error {
public:
    using Error::Error;
};

class CampaignAborted : public Error {
public:
    using Error::Error;
};

}  // namespace qttlab

#pragma once

#include <stdexcept>
#include <string>

namespace treesat {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, int line, int column)
        : Error(what + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
          line_(line), column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

class CycleError : public Error {
public:
    using Error::Error;
};

// Raised when the solver exceeds its node-type budget. The instance is too
// large for the configured limit; the verdict is not known.
class ResourceLimit : public Error {
public:
    using Error::Error;
};

class UnknownRoot : public Error {
public:
    using Error::Error;
};

class ForestError : public Error {
public:
    using Error::Error;
};

class UnsupportedSugar : public Error {
public:
    using Error::Error;
};

class UnsupportedQuery : public Error {
public:
    using Error::Error;
};

class ArityError : public Error {
public:
    using Error::Error;
};

class UnknownPredicate : public Error {
public:
    using Error::Error;
};

class UnknownSchemaFile : public Error {
public:
    using Error::Error;
};

class UnresolvedPlaceholder : public Error {
public:
    using Error::Error;
};

}  // namespace treesat

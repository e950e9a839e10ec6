#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sdesql {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MissingFile : public Error {
public:
    explicit MissingFile(const std::string& path) : Error("missing file: " + path), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class MalformedRecord : public Error {
public:
    MalformedRecord(std::size_t index, std::string field, const std::string& why)
        : Error("malformed record " + std::to_string(index) + " (field '" + field + "'): " + why),
          index_(index),
          field_(std::move(field)) {}
    std::size_t index() const noexcept { return index_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t index_;
    std::string field_;
};

class UnreadableDatabase : public Error {
public:
    using Error::Error;
};

class NotCanonicalizable : public Error {
public:
    using Error::Error;
};

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t position, const std::string& message)
        : Error("syntax error at " + std::to_string(position) + ": " + message),
          position_(position),
          message_(message) {}
    std::size_t position() const noexcept { return position_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::size_t position_;
    std::string message_;
};

class WouldEmptySelectList : public Error {
public:
    WouldEmptySelectList() : Error("removal would leave an empty select list") {}
};

/// Select-list surgery that would change row multiplicity or break a reference.
class UnsafeSelectEdit : public Error {
public:
    using Error::Error;
};

class UnknownColumn : public Error {
public:
    explicit UnknownColumn(const std::string& column) : Error("unknown column in probe scope: " + column) {}
};

class UnknownTemplate : public Error {
public:
    explicit UnknownTemplate(const std::string& id) : Error("unknown template: " + id) {}
};

class MissingBinding : public Error {
public:
    explicit MissingBinding(std::string name) : Error("missing binding: " + name), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class EndpointError : public Error {
public:
    EndpointError(int status, std::string body)
        : Error("endpoint error " + std::to_string(status) + ": " + body.substr(0, 200)),
          status_(status),
          body_(std::move(body)) {}
    int status() const noexcept { return status_; }
    const std::string& body() const noexcept { return body_; }

private:
    int status_;
    std::string body_;
};

class ReplayMiss : public Error {
public:
    explicit ReplayMiss(std::string fingerprint)
        : Error("replay miss: " + fingerprint), fingerprint_(std::move(fingerprint)) {}
    const std::string& fingerprint() const noexcept { return fingerprint_; }

private:
    std::string fingerprint_;
};

class LlmTimeout : public Error {
public:
    using Error::Error;
};

class ParseFailure : public Error {
public:
    ParseFailure(const std::string& why, std::string raw) : Error("parse failure: " + why), raw_(std::move(raw)) {}
    const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

/// Raised when no target candidate exists; callers re-link against the full schema.
class EscalateToFullSchema : public Error {
public:
    EscalateToFullSchema() : Error("no target candidates; escalate to full schema") {}
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace sdesql

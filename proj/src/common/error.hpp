#pragma once

#include <stdexcept>
#include <string>

namespace vultriage {

// Stable error categories. The C API maps these 1:1 onto vt_status values.
enum class ErrorCode {
    Usage,
    Syntax,
    UnsupportedLanguage,
    MissingPlaceholder,
    CorpusFormat,
    IndexFormat,
    EncoderUnavailable,
    EmptyCorpus,
    Llm,
    VerdictParse,
    QueryParse,
    MissingPrediction,
    Data,
    Io,
    Internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class SyntaxError : public Error {
public:
    SyntaxError(const std::string& msg, int line, int column)
        : Error(ErrorCode::Syntax,
                "syntax error at " + std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
          line_(line), column_(column) {}
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

class UnsupportedLanguage : public Error {
public:
    explicit UnsupportedLanguage(const std::string& lang)
        : Error(ErrorCode::UnsupportedLanguage, "no frontend registered for language '" + lang + "'") {}
};

class MissingPlaceholder : public Error {
public:
    explicit MissingPlaceholder(const std::string& key)
        : Error(ErrorCode::MissingPlaceholder, "template placeholder <" + key + "> has no value") {}
};

class CorpusFormatError : public Error {
public:
    explicit CorpusFormatError(const std::string& msg) : Error(ErrorCode::CorpusFormat, msg) {}
};

class IndexFormatError : public Error {
public:
    explicit IndexFormatError(const std::string& msg) : Error(ErrorCode::IndexFormat, msg) {}
};

class EncoderUnavailable : public Error {
public:
    explicit EncoderUnavailable(const std::string& msg) : Error(ErrorCode::EncoderUnavailable, msg) {}
};

class EmptyCorpus : public Error {
public:
    EmptyCorpus() : Error(ErrorCode::EmptyCorpus, "knowledge index is empty") {}
};

class QueryParseError : public Error {
public:
    explicit QueryParseError(const std::string& msg) : Error(ErrorCode::QueryParse, msg) {}
};

class VerdictParseError : public Error {
public:
    explicit VerdictParseError(const std::string& msg) : Error(ErrorCode::VerdictParse, msg) {}
};

class MissingPrediction : public Error {
public:
    explicit MissingPrediction(const std::string& id)
        : Error(ErrorCode::MissingPrediction, "no prediction for function '" + id + "'") {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(ErrorCode::Data, msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(ErrorCode::Io, msg) {}
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& msg) : Error(ErrorCode::Usage, msg) {}
};

} // namespace vultriage

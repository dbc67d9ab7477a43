#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace alnf {

/// Base class for every error this library throws deliberately.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidToken : public Error {
public:
    InvalidToken(int token, int vocab_size)
        : Error("token id " + std::to_string(token) + " out of vocabulary (size " +
                std::to_string(vocab_size) + ")") {}
};

class ContextOverflow : public Error {
public:
    ContextOverflow(std::size_t length, std::size_t window)
        : Error("sequence length " + std::to_string(length) + " exceeds context window " +
                std::to_string(window)) {}
};

class NumericalFailure : public Error {
public:
    explicit NumericalFailure(const std::string& what, long step = -1)
        : Error(step >= 0 ? "step " + std::to_string(step) + ": " + what : what), step_(step) {}

    long step() const { return step_; }

private:
    long step_;
};

class EmptyBatch : public Error {
public:
    explicit EmptyBatch(const std::string& what = "empty batch") : Error(what) {}
};

class ShapeMismatch : public Error {
public:
    explicit ShapeMismatch(const std::string& what) : Error(what) {}
};

class MissingField : public Error {
public:
    explicit MissingField(const std::string& field) : Error("missing or empty field: " + field) {}
};

class MissingExemplars : public Error {
public:
    MissingExemplars() : Error("few-shot mode requires at least one labeled exemplar") {}
};

class MissingCounterpart : public Error {
public:
    explicit MissingCounterpart(std::vector<std::string> ids)
        : Error(describe(ids)), ids_(std::move(ids)) {}

    const std::vector<std::string>& ids() const { return ids_; }

private:
    static std::string describe(const std::vector<std::string>& ids) {
        std::string s = "items present in only one labeling run:";
        for (const auto& id : ids) s += " " + id;
        return s;
    }

    std::vector<std::string> ids_;
};

class DuplicateItem : public Error {
public:
    explicit DuplicateItem(const std::string& id) : Error("duplicate item id: " + id) {}
};

class DegenerateDistribution : public Error {
public:
    explicit DegenerateDistribution(const std::string& what = "zero variance input")
        : Error(what) {}
};

class InvalidRatio : public Error {
public:
    explicit InvalidRatio(double rho)
        : Error("probability ratio must be positive, got " + std::to_string(rho)) {}
};

class UnparseableScores : public Error {
public:
    explicit UnparseableScores(const std::string& first_line)
        : Error("first line is not two bare numbers: \"" + first_line + "\"") {}
};

class FileNotFound : public Error {
public:
    explicit FileNotFound(const std::string& path) : Error("file not found: " + path) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

class BadCheckpoint : public Error {
public:
    explicit BadCheckpoint(const std::string& what) : Error(what) {}
};

/// Catch-all for violated preconditions that have no dedicated type.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

}  // namespace alnf

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace fedvit {

// Base class for every error raised by the library. Catch this to map
// failures onto process exit codes without losing the specific type.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Operand shapes do not conform (matmul, embed, apply_sgd, ...).
class ShapeError : public Error {
public:
    using Error::Error;
};

// LU hit a pivot below tolerance; `pivot_index` is the failing column.
class SingularMatrixError : public Error {
public:
    SingularMatrixError(const std::string& what, std::size_t pivot_index)
        : Error(what), pivot_index(pivot_index) {}
    std::size_t pivot_index;
};

// Normal-equations system is rank deficient; `rank` is the numerical rank.
class RankDeficiencyError : public Error {
public:
    RankDeficiencyError(const std::string& what, std::size_t rank)
        : Error(what), rank(rank) {}
    std::size_t rank;
};

// Plaintext and ciphertext values were mixed in one operation.
class DomainMixError : public Error {
public:
    using Error::Error;
};

// Loss or gradient became non-finite.
class NumericError : public Error {
public:
    using Error::Error;
};

// Key generation exhausted its resample budget.
class KeyGenError : public Error {
public:
    using Error::Error;
};

// Malformed input file (key/model/dataset) or config.
class FormatError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Wire-format errors. Incomplete frames are retryable (read more bytes);
// corrupt frames are fatal for the connection.
class IncompleteFrameError : public Error {
public:
    using Error::Error;
};

class CorruptFrameError : public Error {
public:
    using Error::Error;
};

class UnsupportedVersionError : public Error {
public:
    using Error::Error;
};

class SizeError : public Error {
public:
    using Error::Error;
};

// Protocol-level violations: duplicate client ids, wrong message type.
class ProtocolError : public Error {
public:
    using Error::Error;
};

// Client saw a round number it did not expect.
class StaleRoundError : public Error {
public:
    using Error::Error;
};

// A federated run died mid-way; carries the last completed round.
class AbortedRunError : public Error {
public:
    AbortedRunError(const std::string& what, std::uint32_t last_round)
        : Error(what), last_round(last_round) {}
    std::uint32_t last_round;
};

class TransportError : public Error {
public:
    using Error::Error;
};

}  // namespace fedvit

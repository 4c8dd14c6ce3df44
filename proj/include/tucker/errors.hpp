#pragma once

#include <stdexcept>
#include <string>

namespace tucker {

// Shape or dimension mismatch between operands.
class DimensionError : public std::invalid_argument {
public:
    explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// An improvement-direction constructor found nothing to do at this point
// (e.g. the extraneous part is already zero, or a large singular part is empty).
class NoDirection : public std::runtime_error {
public:
    explicit NoDirection(const std::string& what) : std::runtime_error(what) {}
};

// The missing-direction sampler was asked for a subspace that is trivial.
class NoMissingDirection : public NoDirection {
public:
    explicit NoMissingDirection(const std::string& what) : NoDirection(what) {}
};

// Objective or gradient evaluated to NaN/Inf during a search.
class NonFiniteError : public std::runtime_error {
public:
    explicit NonFiniteError(const std::string& what) : std::runtime_error(what) {}
};

// The theory-mode schedule has no representable tau.
class ScheduleError : public std::runtime_error {
public:
    explicit ScheduleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tucker

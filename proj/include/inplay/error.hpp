#pragma once

#include <stdexcept>
#include <string>

namespace inplay {

// Malformed or inconsistent input data (CSV content, missing teams, ...).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Likelihood or optimizer failure that leaves no usable estimate.
class EstimationError : public std::runtime_error {
public:
    explicit EstimationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace inplay

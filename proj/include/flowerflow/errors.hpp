#pragma once
#include <stdexcept>
#include <string>

namespace flowerflow {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input outside a declared domain (chart box, mismatched base points, bad ids).
struct DomainError : Error {
    using Error::Error;
};

// A numerical solver failed to reach its tolerance.
struct SolverError : Error {
    double residual;
    SolverError(const std::string& what, double res) : Error(what), residual(res) {}
};

// Petal resampling would leave the unique-minimizing-geodesic regime.
struct RebalanceError : Error {
    int petal;
    RebalanceError(const std::string& what, int petal_index) : Error(what), petal(petal_index) {}
};

} // namespace flowerflow

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace botlab {

enum class Errc {
    NonStochastic,
    NotErgodic,
    AboveThreshold,
    SizeLimit,
    InvalidTree,
    NoSuchAncestor,
    TooShallow,
    TooLarge,
    NotBelow,
    NotAntichain,
    IncompleteLabeling,
    SupportMismatch,
    OverlappingDomains,
    DomainMismatch,
    DegreeTooHigh,
    ZeroVariance,
    IncompleteObservation,
    ZeroLikelihood,
    ComplexEigenvector,
    DegenerateSpectrum,
    ConfigInvalid,
    InvalidArgument,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what);
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

// State-count cap for dense tables and vertex cap for tree builds.
// Default 2^20, overridable through BOTLAB_SIZE_CAP.
std::size_t size_cap();

// Throws SizeLimit unless q^n <= cap.  Returns q^n.
std::size_t checked_states(int q, std::size_t n, std::size_t cap, const char* what);
std::size_t checked_states(int q, std::size_t n, const char* what);

}  // namespace botlab

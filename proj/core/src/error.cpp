#include "botlab/error.hpp"

#include <cstdlib>
#include <string>

namespace botlab {

const char* errc_name(Errc c) {
    switch (c) {
    case Errc::NonStochastic: return "NonStochastic";
    case Errc::NotErgodic: return "NotErgodic";
    case Errc::AboveThreshold: return "AboveThreshold";
    case Errc::SizeLimit: return "SizeLimit";
    case Errc::InvalidTree: return "InvalidTree";
    case Errc::NoSuchAncestor: return "NoSuchAncestor";
    case Errc::TooShallow: return "TooShallow";
    case Errc::TooLarge: return "TooLarge";
    case Errc::NotBelow: return "NotBelow";
    case Errc::NotAntichain: return "NotAntichain";
    case Errc::IncompleteLabeling: return "IncompleteLabeling";
    case Errc::SupportMismatch: return "SupportMismatch";
    case Errc::OverlappingDomains: return "OverlappingDomains";
    case Errc::DomainMismatch: return "DomainMismatch";
    case Errc::DegreeTooHigh: return "DegreeTooHigh";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::IncompleteObservation: return "IncompleteObservation";
    case Errc::ZeroLikelihood: return "ZeroLikelihood";
    case Errc::ComplexEigenvector: return "ComplexEigenvector";
    case Errc::DegenerateSpectrum: return "DegenerateSpectrum";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

std::size_t size_cap() {
    if (const char* env = std::getenv("BOTLAB_SIZE_CAP")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return std::size_t{1} << 20;
}

std::size_t checked_states(int q, std::size_t n, std::size_t cap, const char* what) {
    std::size_t s = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (s > cap / static_cast<std::size_t>(q))
            throw Error(Errc::SizeLimit, std::string(what) + " exceeds the state cap");
        s *= static_cast<std::size_t>(q);
    }
    if (s > cap) throw Error(Errc::SizeLimit, std::string(what) + " exceeds the state cap");
    return s;
}

std::size_t checked_states(int q, std::size_t n, const char* what) {
    return checked_states(q, n, size_cap(), what);
}

}  // namespace botlab

#include "vsa/core/error.hpp"

namespace vsa {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::not_found: return "not_found";
        case ErrorKind::parse: return "parse";
        case ErrorKind::invalid_argument: return "invalid_argument";
        case ErrorKind::duplicate: return "duplicate";
        case ErrorKind::out_of_range: return "out_of_range";
        case ErrorKind::shape_mismatch: return "shape_mismatch";
        case ErrorKind::corrupt: return "corrupt";
        case ErrorKind::version_mismatch: return "version_mismatch";
        case ErrorKind::task_mismatch: return "task_mismatch";
        case ErrorKind::missing_weights: return "missing_weights";
        case ErrorKind::unknown_architecture: return "unknown_architecture";
        case ErrorKind::unsupported: return "unsupported";
        case ErrorKind::growth_cap_exceeded: return "growth_cap_exceeded";
        case ErrorKind::non_finite: return "non_finite";
        case ErrorKind::unauthorized: return "unauthorized";
        case ErrorKind::conflict: return "conflict";
    }
    return "unknown";
}

}  // namespace vsa

#include "tokvar/errors.hpp"

namespace tokvar {

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::config: return 2;
        case ErrorKind::input: return 3;
        case ErrorKind::backend: return 4;
        case ErrorKind::internal: return 5;
    }
    return 5;
}

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::config: return "config";
        case ErrorKind::input: return "input";
        case ErrorKind::backend: return "backend";
        case ErrorKind::internal: return "internal";
    }
    return "internal";
}

}  // namespace tokvar

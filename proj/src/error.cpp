#include "ipsme/error.hpp"

namespace ipsme {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::BadVersion: return "BadVersion";
        case ErrorCode::Truncated: return "Truncated";
        case ErrorCode::ZeroId: return "ZeroId";
        case ErrorCode::TtlExhausted: return "TtlExhausted";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::UnknownHandle: return "UnknownHandle";
        case ErrorCode::LinkFailed: return "LinkFailed";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::Timeout: return "Timeout";
    }
    return "Unknown";
}

}  // namespace ipsme

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ipsme {

enum class ErrorCode {
    BadMagic,
    BadVersion,
    Truncated,
    ZeroId,
    TtlExhausted,
    InvalidArgument,
    UnknownHandle,
    LinkFailed,
    ConfigError,
    Timeout,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers can branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), _code(code) {}

    ErrorCode code() const noexcept { return _code; }

private:
    ErrorCode _code;
};

}  // namespace ipsme

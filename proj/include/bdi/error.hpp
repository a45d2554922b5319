#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bdi {

enum class ErrorCode {
    io,
    empty_rule_set,
    unparseable_url,
    empty_host,
    empty_after_normalize,
    malformed_snapshot,
    dns_failure,
    connect_failure,
    connect_timeout,
    tls_failure,
    redirect_loop,
    malformed_row,
    schema_error,
    one_class_dataset,
    empty_subset,
    invalid_argument,
    all_zero_counts,
    version_error,
    malformed_model,
    scan_failed,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure surfaced by the library carries one of the codes above so
// callers (and the CLI) can branch on the variant without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace bdi

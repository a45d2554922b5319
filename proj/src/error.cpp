#include "bdi/error.hpp"

namespace bdi {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::io: return "IoError";
        case ErrorCode::empty_rule_set: return "EmptyRuleSet";
        case ErrorCode::unparseable_url: return "UnparseableUrl";
        case ErrorCode::empty_host: return "EmptyHost";
        case ErrorCode::empty_after_normalize: return "EmptyAfterNormalize";
        case ErrorCode::malformed_snapshot: return "MalformedSnapshot";
        case ErrorCode::dns_failure: return "DnsFailure";
        case ErrorCode::connect_failure: return "ConnectFailure";
        case ErrorCode::connect_timeout: return "ConnectTimeout";
        case ErrorCode::tls_failure: return "TlsFailure";
        case ErrorCode::redirect_loop: return "RedirectLoop";
        case ErrorCode::malformed_row: return "MalformedRow";
        case ErrorCode::schema_error: return "SchemaError";
        case ErrorCode::one_class_dataset: return "OneClassDataset";
        case ErrorCode::empty_subset: return "EmptySubset";
        case ErrorCode::invalid_argument: return "InvalidArgument";
        case ErrorCode::all_zero_counts: return "AllZeroCounts";
        case ErrorCode::version_error: return "VersionError";
        case ErrorCode::malformed_model: return "MalformedModel";
        case ErrorCode::scan_failed: return "ScanFailed";
    }
    return "Unknown";
}

}  // namespace bdi

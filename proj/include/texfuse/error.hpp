#ifndef TEXFUSE_ERROR_HPP
#define TEXFUSE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace texfuse {

enum class Errc {
    malformed_file,
    unsupported_format,
    dimension_mismatch,
    image_too_small,
    out_of_bounds,
    frame_load_failure,
    empty_class,
    schema_mismatch,
    class_too_small,
    degenerate_data,
    fingerprint_mismatch,
    version_mismatch,
    corrupt_model,
    workload_failure,
    invalid_argument,
    io_failure,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::malformed_file: return "MalformedFile";
        case Errc::unsupported_format: return "UnsupportedFormat";
        case Errc::dimension_mismatch: return "DimensionMismatch";
        case Errc::image_too_small: return "ImageTooSmall";
        case Errc::out_of_bounds: return "OutOfBounds";
        case Errc::frame_load_failure: return "FrameLoadFailure";
        case Errc::empty_class: return "EmptyClass";
        case Errc::schema_mismatch: return "SchemaMismatch";
        case Errc::class_too_small: return "ClassTooSmall";
        case Errc::degenerate_data: return "DegenerateData";
        case Errc::fingerprint_mismatch: return "FingerprintMismatch";
        case Errc::version_mismatch: return "VersionMismatch";
        case Errc::corrupt_model: return "CorruptModel";
        case Errc::workload_failure: return "WorkloadFailure";
        case Errc::invalid_argument: return "InvalidArgument";
        case Errc::io_failure: return "IoFailure";
    }
    return "Error";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace texfuse

#endif

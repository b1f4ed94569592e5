#ifndef SBLAB_ERROR_HPP
#define SBLAB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace sblab {

enum class errc {
    bad_argument,
    io_error,
    too_few_samples,
    sample_outside_boundary,
    degenerate_boundary,
    path_exits_mask,
    schema_violation,
    station_off_bridge,
    bad_stiffener_treatment,
    nonphysical_material,
    unstable_configuration,
    divergence,
    insufficient_decay,
    undefined_centroid,
    disjoint_stations,
    non_bracketing,
    non_convergence,
    empty_region,
};

class error : public std::runtime_error {
public:
    error(errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    errc code() const { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw error(code, msg); }

inline void require(bool ok, errc code, const std::string& msg) {
    if (!ok) fail(code, msg);
}

} // namespace sblab

#endif

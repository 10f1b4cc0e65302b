#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace monostat {

/// Requested enumeration would exceed the configured state cap.
/// Carries the number of states the request would have produced
/// (saturated at uint64 max when the true count overflows).
class capacity_error : public std::runtime_error {
public:
    capacity_error(const std::string& what, std::uint64_t requested_states)
        : std::runtime_error(what), requested(requested_states) {}

    std::uint64_t requested;
};

/// Spectrum levels and mode order do not describe the same mode set.
class alignment_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Statistics kind requires a total order but the mode order has
/// non-singleton blocks.
class kind_order_mismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Integer degeneracy arithmetic would wrap.
class degeneracy_overflow : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

/// Input lies outside the validity region of an approximation.
class outside_validity : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed spectrum document; `where` names the offending field.
class spectrum_parse_error : public std::runtime_error {
public:
    spectrum_parse_error(const std::string& where, const std::string& what)
        : std::runtime_error(where + ": " + what), field(where) {}

    std::string field;
};

} // namespace monostat

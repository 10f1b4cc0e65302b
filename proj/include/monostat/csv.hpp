#pragma once

#include <cstdio>
#include <ostream>
#include <string>

namespace monostat {

/// Fixed 17-significant-digit rendering. 17 digits round-trip any double,
/// so identical inputs always serialize to identical bytes.
inline std::string csv_num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string csv_num(bool b) { return b ? "1" : "0"; }

template <typename T>
    requires std::is_integral_v<T>
std::string csv_num(T x) {
    return std::to_string(x);
}

namespace detail {
inline void csv_row_impl(std::ostream&) {}
} // namespace detail

/// Writes one comma-separated row terminated by '\n'.
template <typename T, typename... Rest>
void csv_row(std::ostream& os, const T& first, const Rest&... rest) {
    if constexpr (std::is_convertible_v<T, std::string>)
        os << first;
    else
        os << csv_num(first);
    ((os << ',', [&os](const auto& v) {
         if constexpr (std::is_convertible_v<decltype(v), std::string>)
             os << v;
         else
             os << csv_num(v);
     }(rest)),
     ...);
    os << '\n';
}

} // namespace monostat

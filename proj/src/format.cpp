#include "qadv/format.hpp"

#include "qadv/errors.hpp"

#include <array>
#include <charconv>
#include <system_error>

namespace qadv {

std::string format_double(double x) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last) {
        throw Error("not a number: '" + std::string(text) + "'");
    }
    return value;
}

}  // namespace qadv

#include "icsel/format.hpp"

#include <charconv>
#include <cmath>

namespace icsel {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

bool parse_double(const std::string& text, double& value) {
    if (text.empty()) return false;
    if (text == "inf" || text == "+inf" || text == "Inf") {
        value = HUGE_VAL;
        return true;
    }
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (*first == '+') ++first;
    const auto res = std::from_chars(first, last, value);
    return res.ec == std::errc() && res.ptr == last;
}

} // namespace icsel

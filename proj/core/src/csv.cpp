#include "fsqkd/csv.hpp"

#include <charconv>
#include <cmath>

namespace fsqkd::csv {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void Writer::comment(const std::string& line) { os_ << "# " << line << '\n'; }

void Writer::header(const std::vector<std::string>& names) { row(names); }

void Writer::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os_ << ',';
        os_ << cells[i];
    }
    os_ << '\n';
}

} // namespace fsqkd::csv

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fsqkd::csv {

/// Shortest round-trip decimal representation, locale-independent.
std::string num(double v);

inline std::string boolean(bool b) { return b ? "true" : "false"; }

/// Minimal CSV emitter. Comment lines ("# ...") may precede the header.
class Writer {
public:
    explicit Writer(std::ostream& os) : os_(os) {}

    void comment(const std::string& line);
    void header(const std::vector<std::string>& names);
    void row(const std::vector<std::string>& cells);

private:
    std::ostream& os_;
};

} // namespace fsqkd::csv

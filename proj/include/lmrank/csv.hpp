#pragma once

#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lmrank::csv {

inline std::vector<std::string> split(const std::string& line, char delim = ',') {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, delim)) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == delim) {
        out.emplace_back();
    }
    if (out.empty()) {
        out.emplace_back();
    }
    return out;
}

// Calls fn(line_number, fields) for every data row. Verifies the header
// matches exactly; strips trailing CR so CRLF files load on any platform.
inline void for_each_row(const std::string& path, const std::string& expected_header,
                         const std::function<void(std::size_t, const std::vector<std::string>&)>& fn) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error(path + ": cannot open file");
    }
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!saw_header) {
            if (line != expected_header) {
                throw std::runtime_error(path + ":1: expected header '" + expected_header +
                                         "', got '" + line + "'");
            }
            saw_header = true;
            continue;
        }
        if (line.empty()) {
            continue;
        }
        fn(line_no, split(line));
    }
    if (!saw_header) {
        throw std::runtime_error(path + ": empty file, expected header '" + expected_header + "'");
    }
}

}  // namespace lmrank::csv

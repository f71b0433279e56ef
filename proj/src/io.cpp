#include "chatboost/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "chatboost/error.hpp"

namespace chatboost {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, const std::string& context) {
    const char* first = token.data();
    const char* last = first + token.size();
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    while (last > first && (last[-1] == ' ' || last[-1] == '\t')) --last;
    double value = 0.0;
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last || first == last) {
        throw ParseError("expected a number for " + context + ", got '" + token + "'");
    }
    if (!std::isfinite(value)) {
        throw ParseError("non-finite value for " + context + ": '" + token + "'");
    }
    return value;
}

long long parse_int(const std::string& token, const std::string& context) {
    const char* first = token.data();
    const char* last = first + token.size();
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    while (last > first && (last[-1] == ' ' || last[-1] == '\t')) --last;
    long long value = 0;
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last || first == last) {
        throw ParseError("expected an integer for " + context + ", got '" + token + "'");
    }
    return value;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void atomic_write_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::remove(tmp.c_str());
            throw IoError("short write to " + tmp);
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw IoError("cannot rename " + tmp + " to " + path);
    }
}

}  // namespace chatboost

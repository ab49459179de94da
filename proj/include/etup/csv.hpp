#pragma once

#include <string>
#include <vector>

namespace etup::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    // 1-based file line of each data row, for error messages.
    std::vector<long> lines;
};

// Reads a comma-separated file with a mandatory header line. Fields are
// plain (no quoting); trailing '\r' is stripped. Empty lines are skipped.
Table read_file(const std::string& path);

// Throws a config error naming the file when the header differs.
void expect_header(const Table& t, const std::vector<std::string>& expected,
                   const std::string& path);

// Locale-free numeric parsing; throws invalid-input naming the line.
double parse_double(const std::string& field, const std::string& path,
                    long line);
long parse_long(const std::string& field, const std::string& path, long line);

// Shortest round-trip decimal representation.
std::string format_double(double v);
std::string format_float(float v);

class Writer {
public:
    explicit Writer(const std::string& path);
    ~Writer();

    void row(const std::vector<std::string>& fields);
    void close();

private:
    struct Impl;
    Impl* impl_;
};

}  // namespace etup::csv

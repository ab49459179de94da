#include "etup/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "etup/error.hpp"

namespace etup::csv {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

}  // namespace

Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_io("cannot open '" + path + "'");

    Table t;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (t.header.empty()) {
            t.header = split_fields(line);
            continue;
        }
        auto fields = split_fields(line);
        if (fields.size() != t.header.size()) {
            throw_invalid(path + ":" + std::to_string(line_no) + ": expected " +
                          std::to_string(t.header.size()) + " fields, got " +
                          std::to_string(fields.size()));
        }
        t.rows.push_back(std::move(fields));
        t.lines.push_back(line_no);
    }
    if (t.header.empty() && line_no == 0) {
        // Completely empty file: treat as headerless empty table.
        return t;
    }
    return t;
}

void expect_header(const Table& t, const std::vector<std::string>& expected,
                   const std::string& path) {
    if (t.header.empty() && t.rows.empty()) return;  // empty file is fine
    if (t.header != expected) {
        std::ostringstream oss;
        oss << path << ": unexpected header, want ";
        for (std::size_t i = 0; i < expected.size(); ++i)
            oss << (i ? "," : "") << expected[i];
        throw_config(oss.str());
    }
}

double parse_double(const std::string& field, const std::string& path,
                    long line) {
    double v = 0.0;
    if (field == "nan" || field == "NaN" || field == "NAN")
        return std::nan("");
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw_invalid(path + ":" + std::to_string(line) +
                      ": bad numeric field '" + field + "'");
    }
    return v;
}

long parse_long(const std::string& field, const std::string& path, long line) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw_invalid(path + ":" + std::to_string(line) +
                      ": bad integer field '" + field + "'");
    }
    return v;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string format_float(float v) {
    if (std::isnan(v)) return "";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

struct Writer::Impl {
    std::ofstream out;
    std::string path;
};

Writer::Writer(const std::string& path) : impl_(new Impl) {
    impl_->path = path;
    impl_->out.open(path, std::ios::binary);  // binary: stable newlines
    if (!impl_->out) {
        delete impl_;
        impl_ = nullptr;
        throw_io("cannot write '" + path + "'");
    }
}

Writer::~Writer() { delete impl_; }

void Writer::row(const std::vector<std::string>& fields) {
    auto& out = impl_->out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << fields[i];
    }
    out << '\n';
    if (!out) throw_io("write failed on '" + impl_->path + "'");
}

void Writer::close() {
    impl_->out.close();
    if (impl_->out.fail()) throw_io("close failed on '" + impl_->path + "'");
}

}  // namespace etup::csv

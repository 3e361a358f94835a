#include "relight/textio.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace relight::textio {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << contents;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += header[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument("write_csv: row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    write_text_file(path, out);
}

namespace {

std::vector<double> parse_row(const std::string& line, const std::string& path, int lineno) {
    std::vector<double> vals;
    const char* p = line.c_str();
    const char* end = p + line.size();
    while (p < end) {
        char* after = nullptr;
        const double v = std::strtod(p, &after);
        if (after == p)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected a number");
        vals.push_back(v);
        p = after;
        while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
        if (p < end) {
            if (*p != ',') throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected ','");
            ++p;
        }
    }
    return vals;
}

}  // namespace

Eigen::MatrixXd read_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto vals = parse_row(line, path, lineno);
        if (!rows.empty() && vals.size() != rows.front().size())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": inconsistent row width");
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw std::runtime_error(path + ": no data rows");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out += ',';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    write_text_file(path, out);
}

Eigen::MatrixXd read_binary_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::uint64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
    if (!in) throw std::runtime_error(path + ": truncated header");
    if (rows == 0 || cols == 0 || rows > (1ull << 32) || cols > (1ull << 32))
        throw std::runtime_error(path + ": implausible matrix header");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            double v;
            in.read(reinterpret_cast<char*>(&v), sizeof(v));
            if (!in) throw std::runtime_error(path + ": truncated payload");
            m(i, j) = v;
        }
    }
    return m;
}

void write_binary_matrix(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    const std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            out.write(reinterpret_cast<const char*>(&v), sizeof(v));
        }
    if (!out) throw std::runtime_error("write failed: " + path);
}

Eigen::VectorXd read_csv_vector(const std::string& path) {
    const Eigen::MatrixXd m = read_csv_matrix(path);
    if (m.cols() != 1) throw std::runtime_error(path + ": expected a single column");
    return m.col(0);
}

void write_csv_vector(const std::string& path, const Eigen::VectorXd& v) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out += format_double(v[i]);
        out += '\n';
    }
    write_text_file(path, out);
}

}  // namespace relight::textio

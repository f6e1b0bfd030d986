#include "causalfs/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace causalfs {

void Dataset::validate() const {
    if (x.rows() != y.rows() || z.rows() != y.rows())
        throw std::invalid_argument("Dataset: row count mismatch between blocks");
    if (!x.allFinite() || !y.allFinite() || !z.allFinite())
        throw std::invalid_argument("Dataset: non-finite entry");
}

std::string csv_double(double value) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, value);
        if (std::strtod(buf, nullptr) == value) break;
    }
    return buf;
}

void write_csv(std::ostream& out, const Dataset& data) {
    data.validate();
    bool first = true;
    auto emit = [&](const char* prefix, int i) {
        if (!first) out << ',';
        first = false;
        out << prefix << i + 1;
    };
    for (int i = 0; i < data.x_cols(); ++i) emit("x", i);
    for (int i = 0; i < data.y_cols(); ++i) emit("y", i);
    for (int i = 0; i < data.z_cols(); ++i) emit("z", i);
    out << '\n';

    for (int r = 0; r < data.rows(); ++r) {
        first = true;
        auto cell = [&](double v) {
            if (!first) out << ',';
            first = false;
            out << csv_double(v);
        };
        for (int c = 0; c < data.x_cols(); ++c) cell(data.x(r, c));
        for (int c = 0; c < data.y_cols(); ++c) cell(data.y(r, c));
        for (int c = 0; c < data.z_cols(); ++c) cell(data.z(r, c));
        out << '\n';
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

Dataset read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("read_csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> header = split_csv_line(line);
    int m = 0, n = 0, k = 0;
    // Header must list every x column, then y, then z.
    for (const std::string& h : header) {
        if (h.size() < 2)
            throw std::invalid_argument("read_csv: malformed header cell '" + h + "'");
        const char kind = h[0];
        const int idx = std::atoi(h.c_str() + 1);
        if (kind == 'x' && n == 0 && k == 0 && idx == m + 1) ++m;
        else if (kind == 'y' && k == 0 && idx == n + 1) ++n;
        else if (kind == 'z' && idx == k + 1) ++k;
        else
            throw std::invalid_argument("read_csv: unexpected header cell '" + h + "'");
    }
    if (n == 0)
        throw std::invalid_argument("read_csv: no outcome columns in header");

    std::vector<double> values;
    int rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (static_cast<int>(cells.size()) != m + n + k)
            throw std::invalid_argument("read_csv: row " + std::to_string(rows + 2) +
                                        " has wrong cell count");
        for (const std::string& cell : cells) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0' || !std::isfinite(v))
                throw std::invalid_argument("read_csv: bad number '" + cell + "'");
            values.push_back(v);
        }
        ++rows;
    }

    Dataset data;
    data.x.resize(rows, m);
    data.y.resize(rows, n);
    data.z.resize(rows, k);
    std::size_t p = 0;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < m; ++c) data.x(r, c) = values[p++];
        for (int c = 0; c < n; ++c) data.y(r, c) = values[p++];
        for (int c = 0; c < k; ++c) data.z(r, c) = values[p++];
    }
    data.validate();
    return data;
}

Dataset load_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open csv file '" + path + "'");
    return read_csv(in);
}

void save_csv_file(const std::string& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write csv file '" + path + "'");
    write_csv(out, data);
}

}  // namespace causalfs

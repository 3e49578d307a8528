#include "dcldmd/snapshots.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dcldmd {

std::string ValidationReport::to_string() const {
    if (violations.empty()) return "ok";
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += "; ";
        out += v;
    }
    return out;
}

ValidationReport validate(const SnapshotSet& s) {
    ValidationReport report;
    auto add = [&report](const std::string& msg) { report.violations.push_back(msg); };

    if (s.X.rows() < 1) add("state dimension n must be >= 1");
    if (s.U.rows() < 1) add("input dimension m must be >= 1");
    if (s.X.cols() < 1) add("snapshot count M must be >= 1");
    if (s.U.cols() != s.X.cols()) {
        add("column mismatch: X has " + std::to_string(s.X.cols()) + " columns, U has " +
            std::to_string(s.U.cols()));
    }
    if (s.Y.cols() != s.X.cols()) {
        add("column mismatch: X has " + std::to_string(s.X.cols()) + " columns, Y has " +
            std::to_string(s.Y.cols()));
    }
    if (s.Y.rows() != s.X.rows()) {
        add("row mismatch: X has " + std::to_string(s.X.rows()) + " rows, Y has " +
            std::to_string(s.Y.rows()));
    }
    if (!s.X.allFinite()) add("non-finite entry in X");
    if (!s.U.allFinite()) add("non-finite entry in U");
    if (!s.Y.allFinite()) add("non-finite entry in Y");
    return report;
}

namespace {

std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, int line, int column,
                             const std::string& msg) {
    throw std::runtime_error(path.string() + ": line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + msg);
}

double parse_double(const std::string& field, const std::filesystem::path& path, int line,
                    int column) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        parse_fail(path, line, column, "expected a number, got '" + field + "'");
    }
    return value;
}

long parse_long(const std::string& field, const std::filesystem::path& path, int line,
                int column) {
    long value = 0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        parse_fail(path, line, column, "expected an integer, got '" + field + "'");
    }
    return value;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    return in;
}

}  // namespace

void save_snapshots(const SnapshotSet& s, const std::filesystem::path& path) {
    const ValidationReport report = validate(s);
    if (!report.ok()) {
        throw std::invalid_argument("save_snapshots: invalid set: " + report.to_string());
    }
    std::ofstream out = open_out(path);
    const Eigen::Index n = s.state_dim(), m = s.input_dim(), M = s.count();

    out << "n," << n << ",m," << m << "\n";
    for (Eigen::Index i = 0; i < n; ++i) out << (i ? "," : "") << "x" << (i + 1);
    for (Eigen::Index i = 0; i < m; ++i) out << ",u" << (i + 1);
    for (Eigen::Index i = 0; i < n; ++i) out << ",y" << (i + 1);
    out << "\n";

    for (Eigen::Index k = 0; k < M; ++k) {
        for (Eigen::Index i = 0; i < n; ++i) out << (i ? "," : "") << format_full(s.X(i, k));
        for (Eigen::Index i = 0; i < m; ++i) out << "," << format_full(s.U(i, k));
        for (Eigen::Index i = 0; i < n; ++i) out << "," << format_full(s.Y(i, k));
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

SnapshotSet load_snapshots(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);

    std::string line;
    if (!std::getline(in, line) || line.empty()) {
        throw std::runtime_error(path.string() + ": no snapshots (empty file)");
    }
    auto header = split_csv(line);
    if (header.size() != 4 || header[0] != "n" || header[2] != "m") {
        parse_fail(path, 1, 1, "expected header 'n,<n>,m,<m>'");
    }
    const long n = parse_long(header[1], path, 1, 2);
    const long m = parse_long(header[3], path, 1, 4);
    if (n < 1) parse_fail(path, 1, 2, "state dimension must be >= 1");
    if (m < 1) parse_fail(path, 1, 4, "input dimension must be >= 1");
    const long row_width = 2 * n + m;

    if (!std::getline(in, line)) {
        throw std::runtime_error(path.string() + ": missing column-name line");
    }
    auto names = split_csv(line);
    if (static_cast<long>(names.size()) != row_width) {
        parse_fail(path, 2, 1,
                   "expected " + std::to_string(row_width) + " column names, got " +
                       std::to_string(names.size()));
    }

    std::vector<double> values;
    long rows = 0;
    int line_no = 2;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (static_cast<long>(fields.size()) != row_width) {
            parse_fail(path, line_no, 1,
                       "expected " + std::to_string(row_width) + " fields, got " +
                           std::to_string(fields.size()));
        }
        for (long c = 0; c < row_width; ++c) {
            values.push_back(parse_double(fields[c], path, line_no, static_cast<int>(c + 1)));
        }
        ++rows;
    }
    if (rows == 0) {
        throw std::runtime_error(path.string() + ": no snapshots (no data rows)");
    }

    SnapshotSet s;
    s.X.resize(n, rows);
    s.U.resize(m, rows);
    s.Y.resize(n, rows);
    for (long k = 0; k < rows; ++k) {
        const double* row = values.data() + k * row_width;
        for (long i = 0; i < n; ++i) s.X(i, k) = row[i];
        for (long i = 0; i < m; ++i) s.U(i, k) = row[n + i];
        for (long i = 0; i < n; ++i) s.Y(i, k) = row[n + m + i];
    }
    return s;
}

Eigen::MatrixXd Trajectory::states() const {
    if (records.empty()) return {};
    Eigen::MatrixXd out(records.front().state.size(), static_cast<Eigen::Index>(records.size()));
    for (std::size_t k = 0; k < records.size(); ++k) {
        out.col(static_cast<Eigen::Index>(k)) = records[k].state;
    }
    return out;
}

void save_trajectory(const TrajectoryTable& table, const std::filesystem::path& path) {
    const Eigen::Index n = table.truth.rows();
    const Eigen::Index T = table.truth.cols();
    for (const auto& [label, pred] : table.predictions) {
        if (pred.rows() != n || pred.cols() != T) {
            throw std::invalid_argument("save_trajectory: predictor '" + label +
                                        "' shape differs from truth");
        }
    }

    std::ofstream out = open_out(path);
    out << "k,time";
    for (Eigen::Index i = 0; i < n; ++i) out << ",x_true_" << (i + 1);
    for (const auto& [label, pred] : table.predictions) {
        (void)pred;
        for (Eigen::Index i = 0; i < n; ++i) out << ",x_" << label << "_" << (i + 1);
    }
    out << "\n";

    for (Eigen::Index k = 0; k < T; ++k) {
        out << k << "," << format_full(static_cast<double>(k) * table.dt);
        for (Eigen::Index i = 0; i < n; ++i) out << "," << format_full(table.truth(i, k));
        for (const auto& [label, pred] : table.predictions) {
            (void)label;
            for (Eigen::Index i = 0; i < n; ++i) out << "," << format_full(pred(i, k));
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

TrajectoryTable load_trajectory(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);

    std::string line;
    if (!std::getline(in, line) || line.empty()) {
        throw std::runtime_error(path.string() + ": empty trajectory file");
    }
    auto names = split_csv(line);
    if (names.size() < 3 || names[0] != "k" || names[1] != "time") {
        parse_fail(path, 1, 1, "expected header starting with 'k,time,x_true_1'");
    }

    // Column groups: x_true_1..n, then x_<label>_1..n per predictor.
    long n = 0;
    while (2 + n < static_cast<long>(names.size()) &&
           names[2 + n] == "x_true_" + std::to_string(n + 1)) {
        ++n;
    }
    if (n == 0) parse_fail(path, 1, 3, "expected column 'x_true_1'");

    std::vector<std::string> labels;
    long col = 2 + n;
    while (col < static_cast<long>(names.size())) {
        const std::string& name = names[col];
        const std::string suffix = "_1";
        if (name.rfind("x_", 0) != 0 || name.size() < 4 ||
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
            parse_fail(path, 1, static_cast<int>(col + 1), "expected a predictor column 'x_<label>_1'");
        }
        const std::string label = name.substr(2, name.size() - 4);
        for (long i = 0; i < n; ++i) {
            if (col + i >= static_cast<long>(names.size()) ||
                names[col + i] != "x_" + label + "_" + std::to_string(i + 1)) {
                parse_fail(path, 1, static_cast<int>(col + i + 1),
                           "predictor '" + label + "' must have " + std::to_string(n) + " columns");
            }
        }
        labels.push_back(label);
        col += n;
    }
    const long row_width = 2 + n * (1 + static_cast<long>(labels.size()));

    std::vector<double> values;
    std::vector<long> steps;
    double dt = 0.0;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (static_cast<long>(fields.size()) != row_width) {
            parse_fail(path, line_no, 1,
                       "expected " + std::to_string(row_width) + " fields, got " +
                           std::to_string(fields.size()));
        }
        steps.push_back(parse_long(fields[0], path, line_no, 1));
        const double t = parse_double(fields[1], path, line_no, 2);
        if (steps.back() == 1) dt = t;
        for (long c = 2; c < row_width; ++c) {
            values.push_back(parse_double(fields[c], path, line_no, static_cast<int>(c + 1)));
        }
    }
    const long T = static_cast<long>(steps.size());
    if (T == 0) throw std::runtime_error(path.string() + ": no trajectory rows");

    TrajectoryTable table;
    table.dt = dt;
    table.truth.resize(n, T);
    for (const auto& label : labels) {
        table.predictions.emplace_back(label, Eigen::MatrixXd(n, T));
    }
    const long per_row = n * (1 + static_cast<long>(labels.size()));
    for (long k = 0; k < T; ++k) {
        const double* row = values.data() + k * per_row;
        for (long i = 0; i < n; ++i) table.truth(i, k) = row[i];
        for (std::size_t p = 0; p < labels.size(); ++p) {
            for (long i = 0; i < n; ++i) {
                table.predictions[p].second(i, k) = row[n * (1 + static_cast<long>(p)) + i];
            }
        }
    }
    return table;
}

}  // namespace dcldmd

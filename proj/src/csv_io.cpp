#include "semidr/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace semidr {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

}  // namespace

Matrix read_samples_csv(std::istream& in) {
    std::vector<double> values;
    std::size_t width = 0, rows = 0, line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::size_t column = 0, pos = 0;
        for (;;) {
            const auto comma = line.find(',', pos);
            const std::string field =
                trim(std::string_view(line).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
            ++column;
            // from_chars does not accept a leading '+'.
            const char* begin = field.data() + (!field.empty() && field[0] == '+' ? 1 : 0);
            const char* end = field.data() + field.size();
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(begin, end, v);
            if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
                throw MalformedCsv("malformed value '" + field + "' at row " + std::to_string(line_no) +
                                       ", column " + std::to_string(column),
                                   line_no, column);
            }
            values.push_back(v);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (rows == 0) {
            width = column;
        } else if (column != width) {
            throw MalformedCsv("row " + std::to_string(line_no) + " has " + std::to_string(column) +
                                   " fields, expected " + std::to_string(width),
                               line_no, std::min(column, width) + 1);
        }
        ++rows;
    }
    if (rows == 0) throw MalformedCsv("no observations", 0, 0);
    Matrix out(rows, width);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < width; ++j) out(i, j) = values[i * width + j];
    }
    return out;
}

Matrix read_samples_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFound("cannot open '" + path + "'");
    try {
        return read_samples_csv(in);
    } catch (const MalformedCsv& e) {
        throw MalformedCsv(path + ": " + e.what(), e.row(), e.column());
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileNotFound("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FileNotFound("cannot write '" + path + "'");
    out << text;
    if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace semidr

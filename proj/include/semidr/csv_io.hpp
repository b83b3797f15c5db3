#pragma once

#include <istream>
#include <string>

#include "semidr/errors.hpp"
#include "semidr/types.hpp"

namespace semidr {

class FileNotFound : public Error {
public:
    using Error::Error;
};

/// Headerless numeric CSV, one observation per row. Blank lines are skipped.
/// Every row must have the same number of finite fields. Rows and columns in
/// MalformedCsv are 1-based.
Matrix read_samples_csv(std::istream& in);
Matrix read_samples_csv_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace semidr

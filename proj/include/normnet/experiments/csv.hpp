#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace normnet {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// CSV with a versioned schema comment; reals are printed with 17 significant digits.
class CsvWriter {
public:
    CsvWriter(std::ostream& os, const std::string& schema, const std::vector<std::string>& columns) : os_(os), ncol_(columns.size()) {
        os_ << "# schema: normnet." << schema << "/1\n";
        for (std::size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
        os_ << "\n";
    }

    CsvWriter& cell(const std::string& s) {
        sep();
        os_ << s;
        return *this;
    }
    CsvWriter& cell(double v) { return cell(fmt17(v)); }
    CsvWriter& cell(long long v) { return cell(std::to_string(v)); }
    CsvWriter& cell(std::size_t v) { return cell(std::to_string(v)); }
    CsvWriter& cell(int v) { return cell(std::to_string(v)); }
    CsvWriter& cell(bool v) { return cell(std::string(v ? "1" : "0")); }

    void end_row() {
        os_ << "\n";
        col_ = 0;
    }

private:
    void sep() {
        if (col_++) os_ << ",";
    }
    std::ostream& os_;
    std::size_t ncol_;
    std::size_t col_ = 0;
};

}  // namespace normnet

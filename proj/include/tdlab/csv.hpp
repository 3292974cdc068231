#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tdlab {

inline constexpr int kCsvVersion = 1;

// First line: "# tdlab <kind> v<version>: col1,col2,...", then the column row,
// then data. Trailing '#' lines carry summaries.
struct CsvTable {
    std::string kind;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> trailer;

    void add_row(std::vector<std::string> r);
    int column(const std::string& name) const;  // -1 if absent
    std::vector<double> numeric(const std::string& name) const;  // MissingColumn if absent

    void write(std::ostream& os) const;
    void save(const std::string& path) const;
    static CsvTable read(std::istream& is);
    static CsvTable load(const std::string& path);
};

// %.17g, "nan" and "inf" spelled out; identical doubles give identical text.
std::string fmt(double v);
std::string fmt(long long v);
std::string fmt_bool(bool v);

}  // namespace tdlab

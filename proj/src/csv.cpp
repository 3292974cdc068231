#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tdlab/csv.hpp"
#include "tdlab/errors.hpp"

namespace tdlab {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(long long v) { return std::to_string(v); }
std::string fmt_bool(bool v) { return v ? "1" : "0"; }

void CsvTable::add_row(std::vector<std::string> r) {
    if (r.size() != columns.size())
        throw std::logic_error("row has " + std::to_string(r.size()) + " fields, expected " +
                               std::to_string(columns.size()));
    rows.push_back(std::move(r));
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return int(i);
    return -1;
}

std::vector<double> CsvTable::numeric(const std::string& name) const {
    int c = column(name);
    if (c < 0) throw MissingColumn("'" + name + "' not in " + kind + " table");
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) {
        const std::string& s = r[c];
        v.push_back(s.empty() ? NAN : std::strtod(s.c_str(), nullptr));
    }
    return v;
}

namespace {

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool inq = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (inq) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                inq = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            inq = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += quote(v[i]);
    }
    return s;
}

}  // namespace

void CsvTable::write(std::ostream& os) const {
    os << "# tdlab " << kind << " v" << kCsvVersion << ": " << join(columns) << "\n";
    os << join(columns) << "\n";
    for (const auto& r : rows) os << join(r) << "\n";
    for (const auto& t : trailer) os << "# " << t << "\n";
}

void CsvTable::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    write(out);
}

CsvTable CsvTable::read(std::istream& is) {
    CsvTable t;
    std::string line;
    bool have_header = false;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            // "# tdlab <kind> v1: ..."
            std::istringstream ss(line.substr(1));
            std::string tag, kind;
            ss >> tag >> kind;
            if (tag == "tdlab" && t.kind.empty() && !have_header) t.kind = kind;
            else if (have_header) t.trailer.push_back(line.size() > 2 ? line.substr(2) : "");
            continue;
        }
        auto f = split(line);
        if (!have_header) {
            t.columns = f;
            have_header = true;
        } else {
            f.resize(t.columns.size());
            t.rows.push_back(std::move(f));
        }
    }
    return t;
}

CsvTable CsvTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    return read(in);
}

}  // namespace tdlab

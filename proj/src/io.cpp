#include "icsel/io.hpp"

#include "icsel/errors.hpp"
#include "icsel/format.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace icsel {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    std::ostringstream os;
    os << "line " << line << ": " << what;
    throw DataError(os.str());
}

} // namespace

CsvData read_csv(std::istream& in) {
    CsvData out;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto fields = split(line);
        for (auto& f : fields) f = trim(f);
        if (!header) {
            if (fields.size() < 3 || fields[0] != "left" || fields[1] != "right")
                fail(lineno, "header must read left,right,x1,...,xp");
            out.covariate_names.assign(fields.begin() + 2, fields.end());
            header = true;
            continue;
        }
        if (fields.size() != out.covariate_names.size() + 2) {
            std::ostringstream os;
            os << "expected " << out.covariate_names.size() + 2 << " fields, found " << fields.size();
            fail(lineno, os.str());
        }
        IntervalObservation obs;
        if (!parse_double(fields[0], obs.left)) fail(lineno, "left endpoint '" + fields[0] + "' is not a number");
        if (fields[1].empty()) obs.right = kInf;
        else if (!parse_double(fields[1], obs.right)) fail(lineno, "right endpoint '" + fields[1] + "' is not a number");
        obs.covariates.resize(static_cast<Eigen::Index>(out.covariate_names.size()));
        for (std::size_t j = 0; j < out.covariate_names.size(); ++j) {
            double v = 0.0;
            if (!parse_double(fields[j + 2], v)) fail(lineno, "covariate '" + fields[j + 2] + "' is not a number");
            obs.covariates[static_cast<Eigen::Index>(j)] = v;
        }
        out.rows.push_back(std::move(obs));
        out.lines.push_back(lineno);
    }
    if (!header) throw DataError("input is empty: missing header row");
    return out;
}

CsvData read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file '" + path + "'");
    return read_csv(in);
}

void write_csv(std::ostream& out, const CsvData& data) {
    out << "left,right";
    for (const auto& name : data.covariate_names) out << ',' << name;
    out << '\n';
    for (const auto& row : data.rows) {
        out << format_double(row.left) << ',' << format_double(row.right);
        for (Eigen::Index j = 0; j < row.covariates.size(); ++j) out << ',' << format_double(row.covariates[j]);
        out << '\n';
    }
}

IntervalDataset to_dataset(const CsvData& data) {
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        const auto& r = data.rows[i];
        const std::size_t line = i < data.lines.size() ? data.lines[i] : i + 2;
        if (!std::isfinite(r.left) || r.left < 0.0) fail(line, "left endpoint must be finite and >= 0");
        if (!(r.right > r.left)) fail(line, "right endpoint must exceed left endpoint");
        if (!r.covariates.allFinite()) fail(line, "non-finite covariate");
    }
    if (data.rows.empty()) throw DataError("input has a header but no data rows");
    return IntervalDataset(data.rows);
}

} // namespace icsel

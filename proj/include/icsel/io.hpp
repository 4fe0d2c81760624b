#pragma once

#include "icsel/likelihood.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace icsel {

// Header "left,right,<name>,...", one subject per row. An empty right field
// or "inf" marks right censoring.
struct CsvData {
    std::vector<std::string> covariate_names;
    std::vector<IntervalObservation> rows;
    std::vector<std::size_t> lines;  // input line of each row; empty if built in memory
};

// Throws DataError naming the offending line.
CsvData read_csv(std::istream& in);
CsvData read_csv_file(const std::string& path);

// Canonical form: shortest round-trip decimals, "inf" for censored rows.
void write_csv(std::ostream& out, const CsvData& data);

// Builds the dataset; invalid rows raise DataError naming the input line.
IntervalDataset to_dataset(const CsvData& data);

} // namespace icsel

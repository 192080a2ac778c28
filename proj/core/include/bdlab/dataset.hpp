#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bdlab {

struct Sample {
  std::uint32_t id = 0;  // file line number (header is line 1)
  std::string text;
  int label = 0;
};

/// A labeled text dataset. Labels are dense ids into label_names, assigned
/// in first-appearance order when loading.
struct DatasetFile {
  std::string path;
  std::vector<Sample> samples;
  std::vector<std::string> label_names;
};

/// Parses a UTF-8 TSV with header "sentence<TAB>label". Rows must have
/// exactly two fields and non-empty text. Throws DataError with the
/// offending line number otherwise.
DatasetFile load_tsv(const std::string& path);

/// Same, but against a closed label set (e.g. a test split loaded with the
/// training split's labels). Unknown labels are a DataError.
DatasetFile load_tsv(const std::string& path, const std::vector<std::string>& label_names);

void save_tsv(const DatasetFile& ds, const std::string& path);

}  // namespace bdlab

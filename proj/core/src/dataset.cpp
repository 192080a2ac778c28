#include "bdlab/dataset.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include "bdlab/errors.hpp"

namespace bdlab {

namespace {

constexpr std::string_view kHeader = "sentence\tlabel";

DatasetFile parse_tsv(const std::string& path, const std::vector<std::string>* fixed_labels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset file: " + path);

  DatasetFile ds;
  ds.path = path;
  std::unordered_map<std::string, int> label_ids;
  if (fixed_labels) {
    ds.label_names = *fixed_labels;
    for (std::size_t i = 0; i < ds.label_names.size(); ++i)
      label_ids[ds.label_names[i]] = static_cast<int>(i);
  }

  std::string line;
  std::uint32_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != kHeader)
        throw DataError(path + " line 1: expected header \"sentence<TAB>label\"");
      continue;
    }
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 2) {
      std::ostringstream msg;
      msg << path << " line " << line_no << ": expected 2 tab-separated fields, got "
          << fields.size();
      throw DataError(msg.str());
    }
    if (fields[0].empty()) {
      std::ostringstream msg;
      msg << path << " line " << line_no << ": empty sentence";
      throw DataError(msg.str());
    }
    if (fields[1].empty()) {
      std::ostringstream msg;
      msg << path << " line " << line_no << ": empty label";
      throw DataError(msg.str());
    }

    int label;
    auto it = label_ids.find(fields[1]);
    if (it != label_ids.end()) {
      label = it->second;
    } else if (fixed_labels) {
      std::ostringstream msg;
      msg << path << " line " << line_no << ": unknown label \"" << fields[1] << "\"";
      throw DataError(msg.str());
    } else {
      label = static_cast<int>(ds.label_names.size());
      label_ids[fields[1]] = label;
      ds.label_names.push_back(fields[1]);
    }
    ds.samples.push_back(Sample{line_no, std::move(fields[0]), label});
  }
  if (line_no == 0) throw DataError(path + ": empty file, expected a header line");
  return ds;
}

}  // namespace

DatasetFile load_tsv(const std::string& path) { return parse_tsv(path, nullptr); }

DatasetFile load_tsv(const std::string& path, const std::vector<std::string>& label_names) {
  return parse_tsv(path, &label_names);
}

void save_tsv(const DatasetFile& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write dataset file: " + path);
  out << kHeader << '\n';
  for (const auto& s : ds.samples) {
    out << s.text << '\t' << ds.label_names.at(static_cast<std::size_t>(s.label)) << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace bdlab

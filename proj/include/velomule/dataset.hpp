#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

#include "velomule/ingest.hpp"
#include "velomule/store.hpp"

namespace velomule {

struct DataPaths {
  std::filesystem::path stations;
  std::filesystem::path status;
  std::filesystem::path trips;
};

/// Finds `*station*.csv`, `*status*.csv` and `*trip*.csv` in a directory.
/// Throws Error when a kind is missing or ambiguous.
DataPaths find_data_files(const std::filesystem::path& dir);

struct FileCounts {
  std::size_t data_lines = 0;
  std::size_t parsed = 0;
  std::size_t skipped = 0;
  std::vector<RowIssue> errors;
};

struct IngestSummary {
  FileCounts stations;
  FileCounts status;
  FileCounts trips;
  BuildSummary build;
  bool from_cache = false;
};

struct LoadOptions {
  SchemaConfig schema;
  bool strict = false;
  std::optional<std::filesystem::path> cache;  // read if valid, else rebuilt and written
};

struct LoadedData {
  HistoryStore store;
  IngestSummary summary;
};

/// Parses the three files (concurrently), builds the store, consults the cache.
LoadedData load_dataset(const DataPaths& paths, const LoadOptions& opts);

/// Identity of the inputs (paths, sizes, modification times, schema, strictness).
std::uint64_t dataset_fingerprint(const DataPaths& paths, const LoadOptions& opts);

/// {"stations": {"parsed", "skipped", ...}, "status": ..., "trips": ..., "dangling": n, "build": ...}
nlohmann::json summary_json(const IngestSummary& s);

}  // namespace velomule

#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <vector>

// Locates the shipped scenario corpus: the SCENARIO_DIR environment variable
// (set by ctest) or a relative probe for manual runs from the repo.
inline std::filesystem::path scenario_dir() {
  if (const char* env = std::getenv("SCENARIO_DIR")) return env;
  for (const char* probe : {"scenarios", "../scenarios", "../../scenarios"}) {
    if (std::filesystem::is_directory(probe)) return probe;
  }
  throw std::runtime_error("scenario corpus not found; set SCENARIO_DIR");
}

inline std::vector<std::filesystem::path> corpus_files() {
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(scenario_dir()))
    if (entry.path().extension() == ".json") out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

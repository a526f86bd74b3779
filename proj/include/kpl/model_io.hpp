#pragma once

#include "kpl/dictionary.hpp"
#include "kpl/ridge.hpp"

#include <filesystem>

namespace kpl::io {

/// Dictionary description in `dir`: dictionary.json, plus atoms.csv
/// (theta, atom_1..atom_d) for learned families. Custom families cannot be saved.
void save_dictionary(const std::filesystem::path& dir, const Dictionary& dict);
Dictionary load_dictionary(const std::filesystem::path& dir);

/// Model in `dir`: model.json sidecar, alpha.csv, training inputs, the
/// dictionary files and, when present, offset.csv.
void save_model(const std::filesystem::path& dir, const KplModel& model);
KplModel load_model(const std::filesystem::path& dir);

}  // namespace kpl::io

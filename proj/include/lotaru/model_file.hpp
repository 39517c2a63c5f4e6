#pragma once

#include "lotaru/adjustment.hpp"
#include "lotaru/estimator.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace lotaru {

inline constexpr int kModelFileVersion = 1;

/// Everything `train` persists for one task: the fitted model, its CPU
/// weight, and the training samples (so baselines can be refit later).
struct ModelFile {
    std::string workflow;  // may be empty
    TaskModel model;
    TaskWeight weight;

    bool operator==(const ModelFile&) const = default;
};

/// Flat `key = value` text, version tagged. Doubles use shortest round-trip
/// formatting, so write/read is lossless and byte-stable.
void write_model_file(std::ostream& out, const ModelFile& file);
ModelFile read_model_file(std::istream& in);

/// File name for a task's model: "<workflow>__<task>.model" (or just the task
/// when the workflow is empty), unsafe characters percent-encoded.
std::string model_file_name(const std::string& workflow, const std::string& task);

std::vector<ModelFile> load_model_dir(const std::filesystem::path& dir);

}  // namespace lotaru
